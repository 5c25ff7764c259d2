#include "kb/focal.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace kb {

namespace {

void check_off_diagonal(double xi, double eta) {
  if (angle_gap(xi, eta) < 1e-12)
    throw std::invalid_argument("psi: diagonal input");
}

cplx rel(const BoundaryTable& table, cplx c, double u) {
  return table.position(u) - c;
}

}  // namespace

double psi(const BoundaryTable& table, cplx c, double xi, double eta) {
  check_off_diagonal(xi, eta);
  const cplx p0 = rel(table, c, xi), p1 = rel(table, c, eta);
  return std::abs(p0) + std::abs(p1) + std::abs(p1 - p0);
}

cplx grad_psi(const BoundaryTable& table, cplx c, double xi, double eta) {
  check_off_diagonal(xi, eta);
  const cplx p0 = rel(table, c, xi), p1 = rel(table, c, eta);
  const cplx ch = unit(p1 - p0);
  return cplx(dot(unit(p0) - ch, table.unit_tangent(xi)),
              dot(unit(p1) + ch, table.unit_tangent(eta)));
}

double reflect_param(const BoundaryTable& table, cplx c, double xi) {
  if (!table.contains(c))
    throw GeometryError("reflect_param: center not interior");
  const cplx n = table.inward_normal(xi);
  const cplx in = unit(table.position(xi) - c);
  if (std::abs(dot(in, n)) < 1e-12)
    throw GeometryError("reflect_param: reflected ray grazes the boundary");
  const cplx out = in - 2.0 * dot(in, n) * n;
  return table.chord_exit(xi, out).u;
}

double phi(const BoundaryTable& table, cplx c, double xi) {
  const double xr = reflect_param(table, c, xi);
  const cplx p0 = rel(table, c, xi), p1 = rel(table, c, xr);
  return std::abs(p0) + std::abs(p1 - p0) + std::abs(p1);
}

FocalVerdict is_focal(const BoundaryTable& table, cplx c, double tol) {
  constexpr int n = 1024;
  std::vector<double> values(n);
  for_each_index(n, Exec::Parallel,
                 [&](std::size_t i) { values[i] = phi(table, c, two_pi * double(i) / n); });
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  double mean = 0;
  for (double v : values) mean += v;
  mean /= n;
  FocalVerdict out;
  out.variation = *hi - *lo;
  out.mean = mean;
  out.focal = out.variation < tol * mean;
  out.inconclusive = !out.focal && out.variation < 1e-3 * mean;
  return out;
}

namespace {

double dist_second_derivative(const BoundaryTable& table, cplx c, double u) {
  const cplx p = rel(table, c, u);
  const cplx v = table.velocity(u), a = table.acceleration(u);
  const double r = std::abs(p), s = dot(p, v);
  return (sqnorm(v) + dot(p, a)) / r - s * s / (r * r * r);
}

// derivative of u -> |gamma(u) - c| in the raw parameter
double dist_derivative(const BoundaryTable& table, cplx c, double u) {
  const cplx p = rel(table, c, u);
  return dot(unit(p), table.velocity(u));
}

std::optional<double> polish_dist_critical(const BoundaryTable& table, cplx c, double u) {
  for (int it = 0; it < 60; ++it) {
    const double g = dist_derivative(table, c, u);
    if (std::abs(g) < 1e-13) return wrap_2pi(u);
    const double gp = dist_second_derivative(table, c, u);
    if (std::abs(gp) < 1e-14) break;
    const double step = std::clamp(-g / gp, -0.1, 0.1);
    u += step;
    if (std::abs(step) < 1e-15) break;
  }
  if (std::abs(dist_derivative(table, c, u)) < 1e-10) return wrap_2pi(u);
  return std::nullopt;
}

}  // namespace

KindReport classify_kind(const BoundaryTable& table, cplx c) {
  if (!table.contains(c))
    throw GeometryError("classify_kind: center not interior");
  KindReport rep;
  rep.degenerate_continuum = false;
  rep.readings_disagree = false;

  constexpr int n = 2048;
  std::vector<double> f(n), df(n);
  for (int i = 0; i < n; ++i) {
    const double u = two_pi * double(i) / n;
    f[i] = std::abs(rel(table, c, u));
    df[i] = dist_derivative(table, c, u);
  }
  const auto [flo, fhi] = std::minmax_element(f.begin(), f.end());
  if (*fhi - *flo < 1e-10 * table.diameter()) {
    // distance constant: circle about c, every direction critical
    rep.degenerate_continuum = true;
    rep.kind = rep.kind_same_type = PointKind::Second;
    const FocalVerdict fv = is_focal(table, c);
    rep.focal = fv.focal;
    rep.phi_variation = fv.variation;
    return rep;
  }

  std::vector<double> roots;
  const double h = two_pi / n;
  for (int i = 0; i < n; ++i) {
    const double a = df[i], b = df[(i + 1) % n];
    const double u0 = h * i;
    if (a == 0) {
      if (auto r = polish_dist_critical(table, c, u0)) roots.push_back(*r);
      continue;
    }
    if (a * b < 0) {
      // secant start, Newton finish
      if (auto r = polish_dist_critical(table, c, u0 + h * a / (a - b)))
        roots.push_back(*r);
    } else if (std::abs(a) < 1e-6 && std::abs(a) <= std::abs(df[(i + n - 1) % n]) &&
               std::abs(a) <= std::abs(b)) {
      // near-tangential zero without a sign change
      if (auto r = polish_dist_critical(table, c, u0)) roots.push_back(*r);
    }
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> uniq;
  for (double r : roots) {
    bool fresh = true;
    for (double q : uniq)
      if (angle_gap(r, q) < 1e-7) { fresh = false; break; }
    if (fresh) uniq.push_back(r);
  }

  for (double u : uniq) {
    DistanceCritical dc;
    dc.u = u;
    dc.value = std::abs(rel(table, c, u));
    dc.second = dist_second_derivative(table, c, u);
    const double scale = sqnorm(table.velocity(u)) / dc.value;
    if (std::abs(dc.second) > 1e-8 * scale) {
      dc.type = dc.second > 0 ? ExtremumType::StrictMin : ExtremumType::StrictMax;
    } else {
      // flat critical point: probe the sign of the increment on both sides
      const double d = 1e-4;
      const double dl = std::abs(rel(table, c, u - d)) - dc.value;
      const double dr = std::abs(rel(table, c, u + d)) - dc.value;
      if (dl > 0 && dr > 0) dc.type = ExtremumType::StrictMin;
      else if (dl < 0 && dr < 0) dc.type = ExtremumType::StrictMax;
      else dc.type = ExtremumType::Inflection;
    }
    rep.criticals.push_back(dc);
  }

  const int m = int(rep.criticals.size());
  auto antipodal = [&](int i, int j) {
    const cplx ei = unit(rel(table, c, rep.criticals[i].u));
    const cplx ej = unit(rel(table, c, rep.criticals[j].u));
    return std::abs(ei + ej) < 1e-8;
  };
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (antipodal(i, j)) rep.antipodal_pairs.push_back({i, j});

  auto strict = [&](int i) {
    return rep.criticals[i].type != ExtremumType::Inflection;
  };
  bool any_mixed = false, any_same = false;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      if (!strict(i) || !strict(j) || antipodal(i, j)) continue;
      any_mixed = true;
      if (rep.criticals[i].type == rep.criticals[j].type) any_same = true;
    }
  rep.kind = any_mixed ? PointKind::First : PointKind::Second;
  rep.kind_same_type = any_same ? PointKind::First : PointKind::Second;
  rep.readings_disagree = rep.kind != rep.kind_same_type;

  const FocalVerdict fv = is_focal(table, c);
  rep.focal = fv.focal;
  rep.phi_variation = fv.variation;
  return rep;
}

int winding_index(const std::function<cplx(cplx)>& field, cplx center, double radius) {
  constexpr int n = 720;
  for (int attempt = 0; attempt < 4; ++attempt, radius /= 2) {
    std::vector<cplx> v(n);
    bool ok = true;
    for (int k = 0; k < n; ++k) {
      const double th = two_pi * k / n;
      v[k] = field(center + radius * cplx(std::cos(th), std::sin(th)));
      if (std::abs(v[k]) <= 1e-10) { ok = false; break; }
    }
    if (!ok) continue;
    double total = 0;
    for (int k = 0; k < n; ++k) total += std::arg(v[(k + 1) % n] / v[k]);
    const double w = total / two_pi;
    if (std::abs(w - std::round(w)) < 0.05) return int(std::lround(w));
  }
  throw GeometryError("winding_index: field vanishes on every probe circle");
}

namespace {

struct RawRoot {
  double xi, eta;
  bool found = false;
};

bool newton_psi(const BoundaryTable& table, cplx c, double& xi, double& eta) {
  const double fd = 1e-6;
  for (int it = 0; it < 40; ++it) {
    if (angle_gap(xi, eta) < 1e-4) return false;
    const cplx g = grad_psi(table, c, xi, eta);
    if (std::abs(g) < 1e-11) return true;
    const cplx gx = (grad_psi(table, c, xi + fd, eta) - grad_psi(table, c, xi - fd, eta)) / (2 * fd);
    const cplx gy = (grad_psi(table, c, xi, eta + fd) - grad_psi(table, c, xi, eta - fd)) / (2 * fd);
    const double det = gx.real() * gy.imag() - gy.real() * gx.imag();
    if (std::abs(det) < 1e-14) return false;
    double sx = -(g.real() * gy.imag() - gy.real() * g.imag()) / det;
    double sy = -(gx.real() * g.imag() - g.real() * gx.imag()) / det;
    const double norm = std::hypot(sx, sy);
    const double cap = 0.15;
    if (norm > cap) { sx *= cap / norm; sy *= cap / norm; }
    xi += sx;
    eta += sy;
  }
  return std::abs(grad_psi(table, c, xi, eta)) < 1e-10;
}

}  // namespace

PsiCriticalSet critical_points_psi(const BoundaryTable& table, cplx c, Exec exec) {
  if (!table.contains(c))
    throw GeometryError("critical_points_psi: center not interior");
  PsiCriticalSet out;
  const FocalVerdict fv = is_focal(table, c);
  out.focal_ridge = fv.focal;

  constexpr int n = 128;
  const double h = two_pi / n;

  // corner values of the gradient on the (n+1)^2 node grid
  std::vector<cplx> node((n + 1) * (n + 1));
  for_each_index((n + 1) * (n + 1), exec, [&](std::size_t idx) {
    const int i = int(idx % (n + 1)), j = int(idx / (n + 1));
    const double xi = h * i, eta = h * j;
    node[idx] = angle_gap(xi, eta) < 1e-9 ? cplx(0, 0) : grad_psi(table, c, xi, eta);
  });
  auto corner = [&](int i, int j) { return node[std::size_t(j) * (n + 1) + i]; };

  std::vector<RawRoot> slot(n * n);
  std::vector<unsigned char> unresolved(n * n, 0);
  for_each_index(n * n, exec, [&](std::size_t idx) {
    const int i = int(idx % n), j = int(idx / n);
    const double xc = h * (i + 0.5), yc = h * (j + 0.5);
    if (angle_gap(xc, yc) < 2 * h) return;
    const cplx g00 = corner(i, j), g10 = corner(i + 1, j);
    const cplx g01 = corner(i, j + 1), g11 = corner(i + 1, j + 1);
    const double rlo = std::min({g00.real(), g10.real(), g01.real(), g11.real()});
    const double rhi = std::max({g00.real(), g10.real(), g01.real(), g11.real()});
    const double ilo = std::min({g00.imag(), g10.imag(), g01.imag(), g11.imag()});
    const double ihi = std::max({g00.imag(), g10.imag(), g01.imag(), g11.imag()});
    if (rlo > 0 || rhi < 0 || ilo > 0 || ihi < 0) return;
    double xi = xc, eta = yc;
    if (newton_psi(table, c, xi, eta)) {
      slot[idx] = {xi, eta, true};
      return;
    }
    for (int s = 0; s < 4; ++s) {
      xi = h * (i + 0.25 + 0.5 * (s % 2));
      eta = h * (j + 0.25 + 0.5 * (s / 2));
      if (newton_psi(table, c, xi, eta)) {
        slot[idx] = {xi, eta, true};
        return;
      }
    }
    unresolved[idx] = 1;
  });
  for (unsigned char u : unresolved) out.unresolved_cells += u;

  // dedup up to the (xi,eta) ~ (eta,xi) symmetry
  std::vector<std::pair<double, double>> roots;
  for (const RawRoot& r : slot) {
    if (!r.found) continue;
    double a = wrap_2pi(r.xi), b = wrap_2pi(r.eta);
    if (b < a) std::swap(a, b);
    bool fresh = true;
    for (auto& [qa, qb] : roots) {
      const bool same = angle_gap(a, qa) < 1e-6 && angle_gap(b, qb) < 1e-6;
      const bool swapped = angle_gap(a, qb) < 1e-6 && angle_gap(b, qa) < 1e-6;
      if (same || swapped) { fresh = false; break; }
    }
    if (fresh) roots.emplace_back(a, b);
  }

  for (auto& [xi, eta] : roots) {
    CriticalPoint p;
    p.xi = xi;
    p.eta = eta;
    p.grad_norm = std::abs(grad_psi(table, c, xi, eta));
    p.level = psi(table, c, xi, eta);
    const cplx e0 = unit(rel(table, c, xi)), e1 = unit(rel(table, c, eta));
    p.area_flag = std::abs(e0 + e1) < 1e-8;
    if (out.focal_ridge) {
      p.index = 0;  // zeros form a curve, winding undefined
    } else {
      double rad = std::min(0.1, 0.45 * angle_gap(xi, eta));
      for (auto& [qa, qb] : roots) {
        if (qa == xi && qb == eta) continue;
        const double dist = std::hypot(angle_gap(xi, qa), angle_gap(eta, qb));
        if (dist > 1e-9) rad = std::min(rad, 0.45 * dist);
      }
      try {
        p.index = winding_index(
            [&](cplx q) { return grad_psi(table, c, q.real(), q.imag()); },
            cplx(xi, eta), rad);
      } catch (const GeometryError&) {
        p.index = 0;  // gradient vanishes on every probe circle, cannot certify
      }
    }
    out.points.push_back(p);
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) { return a.level > b.level; });
  return out;
}

BranchValue psi_star(const BoundaryTable& table, cplx c, double xi, double eta) {
  const cplx p0 = rel(table, c, xi), p1 = rel(table, c, eta);
  BranchValue out;
  out.S = std::abs(p0) + std::abs(p1);
  out.grad = cplx(dot(unit(p0), table.unit_tangent(xi)),
                  dot(unit(p1), table.unit_tangent(eta)));
  return out;
}

BranchValue psi_a(const BoundaryTable& table, cplx c, double xi, double eta) {
  const cplx p0 = rel(table, c, xi), p1 = rel(table, c, eta);
  if (cross(p0, p1) >= 0)
    return {psi(table, c, xi, eta), grad_psi(table, c, xi, eta)};
  BranchValue s = psi_star(table, c, xi, eta);
  return {2 * s.S, 2.0 * s.grad};
}

BranchValue psi_c(const BoundaryTable& table, cplx c, double xi, double eta) {
  const cplx p0 = rel(table, c, xi), p1 = rel(table, c, eta);
  if (cross(p0, p1) < 0)
    return {psi(table, c, xi, eta), grad_psi(table, c, xi, eta)};
  BranchValue s = psi_star(table, c, xi, eta);
  return {2 * s.S, 2.0 * s.grad};
}

ChordHessian hess_det_chord(double d1, double d2, double k1, double k2) {
  if (d1 <= 0 || d2 <= 0 || k1 <= 0 || k2 <= 0)
    throw std::invalid_argument("hess_det_chord: inputs must be positive");
  const double d = d1 + d2;
  ChordHessian out;
  out.m = {1 / d + 1 / d1 - 2 * k1, 1 / d, 1 / d, 1 / d + 1 / d2 - 2 * k2};
  out.det = out.m.det();
  return out;
}

FocalPolynomial focal_polynomial(double d, double k1, double k2) {
  if (d <= 0 || k1 <= 0 || k2 <= 0)
    throw std::invalid_argument("focal_polynomial: inputs must be positive");
  if (std::abs(d * k2 - 1) < 1e-12)
    throw std::invalid_argument("focal_polynomial: leading coefficient singular at d k2 = 1");
  FocalPolynomial out;
  out.c0 = 1;
  out.c1 = -2 * k1;
  out.c2 = (k1 + k2 - 2 * d * k1 * k2) / (d * (1 - d * k2));
  out.delta = (d * k2 - 1) * (d * k1 * k2 - k1 - k2);
  auto push = [&](double t) {
    if (t > 0 && t < d) out.roots.push_back(t);
  };
  if (std::abs(out.c2) < 1e-14) {
    push(-out.c0 / out.c1);
  } else {
    const double disc = out.c1 * out.c1 - 4 * out.c2 * out.c0;
    if (disc >= 0) {
      const double s = std::sqrt(disc);
      const double q = -(out.c1 + (out.c1 >= 0 ? s : -s)) / 2;
      push(q / out.c2);
      if (q != 0) push(out.c0 / q);
    }
  }
  std::sort(out.roots.begin(), out.roots.end());
  return out;
}

}  // namespace kb
