#include "kb/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "kb/generating.hpp"

namespace kb {

namespace {

void num(std::string& s, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  s += buf;
}

void num6(std::string& s, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  s += buf;
}

const char* const palette[] = {"#1b6ca8", "#c43d3d", "#2e8b57", "#b8860b",
                               "#6a3d9a", "#0f8b8d", "#d96c2c", "#5d5d81",
                               "#a0365c", "#41683f"};
constexpr int palette_n = 10;

}  // namespace

std::string curve_csv(const std::vector<CurveSample>& samples) {
  std::string s = "u,x,y,kappa\n";
  for (const auto& r : samples) {
    num(s, r.u);
    s += ',';
    num(s, r.point.real());
    s += ',';
    num(s, r.point.imag());
    s += ',';
    num(s, r.kappa);
    s += '\n';
  }
  return s;
}

std::string portrait_csv(const KeplerOrbitTable& table) {
  std::string s = "seed_id,step,u,alpha,energy_residual,min_r\n";
  for (const auto& r : table.rows) {
    if (!r.valid) continue;
    s += std::to_string(r.seed_id);
    s += ',';
    s += std::to_string(r.step);
    s += ',';
    num(s, r.u);
    s += ',';
    num(s, r.alpha);
    s += ',';
    num(s, r.energy_residual);
    s += ',';
    num(s, r.min_r);
    s += '\n';
  }
  return s;
}

std::string psi_csv(const PsiCriticalSet& cps) {
  std::string s = "xi,eta,level,index,area_flag,grad_norm\n";
  for (const auto& p : cps.points) {
    num(s, p.xi);
    s += ',';
    num(s, p.eta);
    s += ',';
    num(s, p.level);
    s += ',';
    s += std::to_string(p.index);
    s += ',';
    s += p.area_flag ? '1' : '0';
    s += ',';
    num(s, p.grad_norm);
    s += '\n';
  }
  return s;
}

std::string orbit_csv(const RealizedOrbit& orbit, const BilliardScene& scene) {
  std::string s = "bounce,u,x,y,arc,r_min\n";
  const int n = orbit.bounces;
  for (int j = 0; j < n; ++j) {
    const cplx z = scene.table.position(orbit.u[j]);
    const auto gv =
        generating_S(scene.table, scene.center, orbit.u[j], orbit.u[(j + 1) % n],
                     orbit.arcs[j], scene.h, scene.mu);
    s += std::to_string(j);
    s += ',';
    num(s, orbit.u[j]);
    s += ',';
    num(s, z.real());
    s += ',';
    num(s, z.imag());
    s += ',';
    s += to_string(orbit.arcs[j]);
    s += ',';
    num(s, gv.arc.r_min);
    s += '\n';
  }
  return s;
}

std::string render_svg(const std::vector<SvgPoint>& points, const SvgStyle& style) {
  const int W = style.width, H = style.height;
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 ";
  s += std::to_string(W);
  s += ' ';
  s += std::to_string(H);
  s += "\" width=\"";
  s += std::to_string(W);
  s += "\" height=\"";
  s += std::to_string(H);
  s += "\">\n";
  if (!points.empty()) {
    double x0 = points[0].x, x1 = points[0].x;
    double y0 = points[0].y, y1 = points[0].y;
    for (const auto& p : points) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    const double mx = 0.04 * W, my = 0.04 * H;
    const double sx = (W - 2 * mx) / std::max(x1 - x0, 1e-300);
    const double sy = (H - 2 * my) / std::max(y1 - y0, 1e-300);
    for (const auto& p : points) {
      s += "<circle cx=\"";
      num6(s, mx + (p.x - x0) * sx);
      s += "\" cy=\"";
      // y grows upward in the data, downward in the drawing
      num6(s, H - my - (p.y - y0) * sy);
      s += "\" r=\"";
      num6(s, style.point_radius);
      s += "\" fill=\"";
      s += palette[((p.series % palette_n) + palette_n) % palette_n];
      s += "\"/>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

void emit_svg(const std::string& path, const std::vector<SvgPoint>& points,
              const SvgStyle& style) {
  write_file(path, render_svg(points, style));
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(content.data(), std::streamsize(content.size()));
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace kb
