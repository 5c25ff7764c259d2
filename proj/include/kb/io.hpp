#pragma once

#include <string>
#include <vector>

#include "kb/focal.hpp"
#include "kb/kepler_billiard.hpp"
#include "kb/shadowing.hpp"
#include "kb/table.hpp"

namespace kb {

// CSV and SVG emission. Every writer formats numbers itself (printf-style,
// C locale) and uses '\n' line ends, so a fixed input yields identical bytes
// on every run and platform.

// columns: u,x,y,kappa
std::string curve_csv(const std::vector<CurveSample>& samples);

// columns: seed_id,step,u,alpha,energy_residual,min_r; rows cut short by a
// grazing impact or solver failure are dropped
std::string portrait_csv(const KeplerOrbitTable& table);

// columns: xi,eta,level,index,area_flag,grad_norm
std::string psi_csv(const PsiCriticalSet& cps);

// columns: bounce,u,x,y,arc,r_min; one row per bounce of the realized orbit,
// arc is the class of the arc leaving that bounce
std::string orbit_csv(const RealizedOrbit& orbit, const BilliardScene& scene);

struct SvgPoint {
  double x = 0, y = 0;
  int series = 0;  // color group, e.g. one per portrait seed
};

struct SvgStyle {
  int width = 800;
  int height = 600;
  double point_radius = 1.5;
};

// Scatter plot with the viewBox fitted to the data (4% margin), one fill
// color per series from a fixed palette. Zero points still produce a valid,
// empty drawing. Output bytes depend only on the inputs.
std::string render_svg(const std::vector<SvgPoint>& points, const SvgStyle& style = {});

// render_svg written to a file.
void emit_svg(const std::string& path, const std::vector<SvgPoint>& points,
              const SvgStyle& style = {});

// Throws std::runtime_error naming the path when it cannot be written.
void write_file(const std::string& path, const std::string& content);

}  // namespace kb
