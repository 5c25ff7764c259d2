#include "kb/kepler_billiard.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "kb/kepler_arc.hpp"

namespace kb {

namespace {

void validate_scene(const BilliardScene& scene) {
  if (!(scene.h > 0)) throw std::invalid_argument("scene: energy must be positive");
  if (!(scene.mu >= 0)) throw std::invalid_argument("scene: mu must be nonnegative");
  if (!scene.table.contains(scene.center))
    throw GeometryError("scene: center lies outside the table");
}

// Jacobi time reparametrized by Levi-Civita: z = w^2, w'' = w, and physical
// time advances by dt = sqrt(2/h) |w|^2 dtau.
struct LcState {
  cplx w, dw;
};

LcState flow(const LcPath& path, double tau) {
  return {path.w(tau), path.dw(tau)};
}

cplx physical_velocity(const LcState& s, double h) {
  return std::sqrt(2.0 * h) * s.w * s.dw / sqnorm(s.w);
}

// integral of |w|^2 over [0, T] for w = A e^tau + B e^-tau
double sqnorm_integral(const LcPath& path, double T) {
  const double a2 = sqnorm(path.A), b2 = sqnorm(path.B);
  return a2 * (std::expm1(2.0 * T)) / 2.0 + b2 * (-std::expm1(-2.0 * T)) / 2.0 +
         2.0 * dot(path.A, path.B) * T;
}

// minimum of |w|^2 over [0, T], endpoints included
double min_sqnorm(const LcPath& path, double T) {
  const double a2 = sqnorm(path.A), b2 = sqnorm(path.B);
  const double c = 2.0 * dot(path.A, path.B);
  auto value = [&](double tau) {
    return a2 * std::exp(2.0 * tau) + b2 * std::exp(-2.0 * tau) + c;
  };
  double m = std::min(value(0.0), value(T));
  if (a2 > 0 && b2 > 0) {
    const double tau_m = 0.25 * std::log(b2 / a2);
    if (tau_m > 0 && tau_m < T) m = std::min(m, value(tau_m));
  }
  return std::max(m, 0.0);
}

}  // namespace

ArrivalInfo propagate(const BilliardScene& scene, const BilliardState& s) {
  validate_scene(scene);
  const BoundaryTable& tbl = scene.table;
  const double diam = tbl.diameter();

  const cplx p0 = tbl.position(s.u);
  const cplx z0 = p0 - scene.center;
  const double r0 = std::abs(z0);
  if (r0 < 1e-12 * diam) throw GeometryError("propagate: launch point at the center");
  const double vn = dot(s.v, tbl.inward_normal(s.u));
  if (!(vn > 0)) throw std::invalid_argument("propagate: state does not point inward");

  const cplx w0 = std::sqrt(z0);
  const cplx dw0 = s.v * std::conj(w0) / std::sqrt(2.0 * scene.h);
  const LcPath path{(w0 + dw0) / 2.0, (w0 - dw0) / 2.0, 0.0};

  // The boundary's tightest turn bounds both the sampling chord and the
  // allowed sag of the conic between samples, so a crossing cannot slip
  // through a step untested deeper than ~2% of the minimal curvature radius.
  const double rho_min = 1.0 / tbl.max_curvature();
  const double chord_cap = 0.30 * rho_min;
  const double sag_cap = 0.02 * rho_min;

  auto offset_at = [&](double tau) {
    const LcState st = flow(path, tau);
    return tbl.boundary_offset(scene.center + st.w * st.w);
  };

  // march until the signed offset turns nonnegative
  double lo = 0.0, hi = 0.0;
  bool bracketed = false;
  double tau = 0.0;
  for (int step = 0; step < 200000 && !bracketed; ++step) {
    const LcState st = flow(path, tau);
    const double r = sqnorm(st.w);
    const double speed_tau = 2.0 * std::abs(st.w) * std::abs(st.dw);
    // |z''| <= 2(|w'|^2 + |w|^2); the 3.0 absorbs growth across the step
    const double ddz = 3.0 * (sqnorm(st.dw) + r) + 1e-300;
    double dtau = std::min(0.1, std::sqrt(8.0 * sag_cap / ddz));
    if (speed_tau > 0) dtau = std::min(dtau, chord_cap / speed_tau);
    const double tau_next = tau + dtau;
    if (offset_at(tau_next) >= 0.0) {
      lo = tau;
      hi = tau_next;
      bracketed = true;
    } else {
      tau = tau_next;
    }
  }
  if (!bracketed) throw GeometryError("propagate: event bracketing failed");

  // the launch sample sits on the curve itself; a bracket starting there
  // needs a strictly interior lower endpoint
  if (lo == 0.0) {
    double probe = hi;
    bool interior = false;
    for (int k = 0; k < 60; ++k) {
      probe *= 0.5;
      if (offset_at(probe) < -1e-14 * diam) {
        lo = probe;
        interior = true;
        break;
      }
    }
    if (!interior) throw GeometryError("propagate: grazing launch never enters the table");
  }

  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (offset_at(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }

  const double tau_exit = 0.5 * (lo + hi);
  const LcState se = flow(path, tau_exit);
  const cplx p_exit = scene.center + se.w * se.w;

  ArrivalInfo out;
  out.u = wrap_2pi(tbl.radial_param(p_exit));
  out.residual = std::abs(p_exit - tbl.position(out.u));
  if (out.residual > 1e-10 * std::max(1.0, diam))
    throw GeometryError("propagate: impact polish failed");
  out.v = physical_velocity(se, scene.h);
  out.transit_time = std::sqrt(2.0 / scene.h) * sqnorm_integral(path, tau_exit);
  out.min_r = min_sqnorm(path, tau_exit);
  const double ell = cross(w0, dw0);
  out.collision = std::abs(ell) <= 1e-13 * std::abs(w0) * std::abs(dw0);
  out.grazing =
      std::abs(dot(out.v, tbl.inward_normal(out.u))) < 1e-6 * std::abs(out.v);
  return out;
}

BilliardState kmap(const BilliardScene& scene, const BilliardState& s) {
  const ArrivalInfo a = propagate(scene, s);
  if (a.grazing) throw GeometryError("kmap: grazing impact, reflection undefined");
  const cplx n = scene.table.inward_normal(a.u);
  return {a.u, a.v - 2.0 * dot(a.v, n) * n};
}

BilliardState launch_state(const BilliardScene& scene, double u, double alpha) {
  if (!(alpha > 0 && alpha < pi))
    throw std::invalid_argument("launch_state: alpha must lie in (0, pi)");
  const double r = std::abs(scene.table.position(u) - scene.center);
  const double speed = std::sqrt(2.0 * (scene.h + scene.mu / r));
  const cplx t = scene.table.unit_tangent(u);
  const cplx n = scene.table.inward_normal(u);
  return {u, speed * (std::cos(alpha) * t + std::sin(alpha) * n)};
}

double launch_angle(const BoundaryTable& table, double u, cplx v) {
  return std::atan2(dot(v, table.inward_normal(u)), dot(v, table.unit_tangent(u)));
}

double energy_residual(const BilliardScene& scene, const BilliardState& s) {
  const double r = std::abs(scene.table.position(s.u) - scene.center);
  return std::abs(0.5 * sqnorm(s.v) - scene.mu / r - scene.h) / scene.h;
}

WellDefined well_defined_check(const BilliardScene& scene) {
  validate_scene(scene);
  const int n = 4096;
  double best = 0;
  double d_min = std::numeric_limits<double>::max();
  for (int i = 0; i < n; ++i) {
    const double u = two_pi * i / n;
    const double d = std::abs(scene.table.position(u) - scene.center);
    if (d < d_min) {
      d_min = d;
      best = u;
    }
  }
  // golden-section polish of the grid minimum
  double a = best - two_pi / n, b = best + two_pi / n;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  auto dist = [&](double u) { return std::abs(scene.table.position(u) - scene.center); };
  double f1 = dist(x1), f2 = dist(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = dist(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = dist(x2);
    }
  }
  d_min = std::min(d_min, std::min(f1, f2));

  WellDefined out;
  out.r_guard = 0.5 * d_min;
  out.margin = scene.table.min_curvature() -
               scene.mu / (2.0 * scene.h * out.r_guard * out.r_guard);
  out.ok = out.margin > 0;
  return out;
}

KeplerOrbitTable portrait(const BilliardScene& scene,
                          const std::vector<PhaseState>& seeds, int n,
                          Exec exec) {
  validate_scene(scene);
  KeplerOrbitTable out;
  out.steps_per_seed = n;
  out.rows.assign(seeds.size() * (n + 1),
                  KeplerOrbitRow{0, 0, 0.0, 0.0, 0.0, 0.0, false});

  std::vector<int> truncated(seeds.size(), 0);
  for_each_index(seeds.size(), exec, [&](size_t k) {
    const size_t base = k * (n + 1);
    for (int step = 0; step <= n; ++step) {
      out.rows[base + step].seed_id = int32_t(k);
      out.rows[base + step].step = step;
    }
    BilliardState st;
    try {
      st = launch_state(scene, seeds[k].u, seeds[k].alpha);
    } catch (const std::exception&) {
      truncated[k] = 1;
      return;
    }
    const double r_launch = std::abs(scene.table.position(st.u) - scene.center);
    out.rows[base] = KeplerOrbitRow{int32_t(k),     0,
                                    wrap_2pi(st.u), seeds[k].alpha,
                                    energy_residual(scene, st), r_launch,
                                    true};
    for (int step = 1; step <= n; ++step) {
      ArrivalInfo arr;
      try {
        arr = propagate(scene, st);
        if (arr.grazing) throw GeometryError("grazing");
      } catch (const std::exception&) {
        truncated[k] = 1;
        break;
      }
      const cplx nrm = scene.table.inward_normal(arr.u);
      st = {arr.u, arr.v - 2.0 * dot(arr.v, nrm) * nrm};
      out.rows[base + step] = KeplerOrbitRow{
          int32_t(k),    step,
          wrap_2pi(st.u), launch_angle(scene.table, st.u, st.v),
          energy_residual(scene, st), arr.min_r,
          true};
    }
  });
  for (int t : truncated) out.truncated_orbits += t;
  return out;
}

}  // namespace kb
