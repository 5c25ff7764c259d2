#include "kb/table.hpp"

#include <algorithm>
#include <cmath>

#include "kb/quadrature.hpp"
#include "kb/rootfind.hpp"

namespace kb {

namespace {
constexpr int kValidationSamples = 4096;
constexpr double kConvexityTol = 1e-10;
}  // namespace

// ---------------------------------------------------------------- WidthSpec

double WidthSpec::a0() const {
  auto it = a.find(0);
  return it == a.end() ? 0.0 : it->second.real();
}

void WidthSpec::validate() const {
  for (const auto& [k, ak] : a) {
    if (k < 0) throw std::invalid_argument("width spec: store coefficients for k >= 0 only");
    if (k == 0) {
      if (std::abs(ak.imag()) > 1e-15 || ak.real() <= 0.0)
        throw std::invalid_argument("width spec: a0 must be real and positive");
    } else if (k == 1) {
      if (std::abs(ak) > 1e-15)
        throw std::invalid_argument("width spec: a1 must vanish (translation gauge)");
    } else if (k % 2 == 0) {
      if (std::abs(ak) > 1e-15)
        throw std::invalid_argument("width spec: even harmonics break constant width");
    }
  }
  if (a.find(0) == a.end())
    throw std::invalid_argument("width spec: a0 is required");
  // rho > 0 everywhere, sampled densely
  for (int i = 0; i < kValidationSamples; ++i) {
    const double xi = two_pi * i / kValidationSamples;
    if (rho(xi) <= kConvexityTol)
      throw std::invalid_argument("width spec: radius of curvature is not positive");
  }
}

double WidthSpec::rho(double xi) const {
  double r = 0.0;
  for (const auto& [k, ak] : a) {
    if (k == 0)
      r += ak.real();
    else
      r += 2.0 * (ak * std::polar(1.0, k * xi)).real();
  }
  return r;
}

double WidthSpec::drho(double xi) const {
  double r = 0.0;
  for (const auto& [k, ak] : a) {
    if (k == 0) continue;
    r += 2.0 * (ak * cplx(0, k) * std::polar(1.0, k * xi)).real();
  }
  return r;
}

// ------------------------------------------------------------ BoundaryTable

BoundaryTable::BoundaryTable(Curve curve, std::string label)
    : curve_(std::move(curve)), label_(std::move(label)), grid_n_(2048) {
  // closure and periodicity
  const cplx p0 = curve_.position(0.0);
  double scale = std::abs(p0) + 1.0;
  for (double u : {0.0, 1.7, 4.1}) {
    if (std::abs(curve_.position(u) - curve_.position(u + two_pi)) > 1e-12 * scale)
      throw std::invalid_argument(label_ + ": curve is not 2pi-periodic");
  }

  grid_pos_.resize(grid_n_ + 1);
  for (int i = 0; i <= grid_n_; ++i)
    grid_pos_[i] = curve_.position(two_pi * i / grid_n_);

  cplx mean = 0;
  for (int i = 0; i < grid_n_; ++i) mean += grid_pos_[i];
  anchor_ = mean / double(grid_n_);

  // strict convexity, positive orientation
  kappa_min_ = kappa_max_ = curve_.curvature(0.0);
  for (int i = 0; i < kValidationSamples; ++i) {
    const double u = two_pi * i / kValidationSamples;
    const double k = curve_.curvature(u);
    if (!(k > kConvexityTol))
      throw std::invalid_argument(label_ + ": table is not strictly convex (curvature <= 0)");
    kappa_min_ = std::min(kappa_min_, k);
    kappa_max_ = std::max(kappa_max_, k);
  }

  double rmax = 0.0;
  for (int i = 0; i < grid_n_; ++i)
    rmax = std::max(rmax, std::abs(grid_pos_[i] - anchor_));
  diameter_ = 2.0 * rmax;

  grid_cumlen_.resize(grid_n_ + 1);
  grid_cumlen_[0] = 0.0;
  auto spd = [this](double u) { return std::abs(curve_.velocity(u)); };
  for (int i = 0; i < grid_n_; ++i) {
    const double ua = two_pi * i / grid_n_, ub = two_pi * (i + 1) / grid_n_;
    grid_cumlen_[i + 1] = grid_cumlen_[i] + fixed_gl16(spd, ua, ub);
  }
  length_ = grid_cumlen_[grid_n_];

  // monotone angular lift about the anchor; strict star-shapedness is a
  // consequence of convexity with an interior anchor
  grid_theta_.resize(grid_n_ + 1);
  grid_r_.resize(grid_n_ + 1);
  double prev = std::arg(grid_pos_[0] - anchor_);
  grid_theta_[0] = prev;
  grid_r_[0] = std::abs(grid_pos_[0] - anchor_);
  for (int i = 1; i <= grid_n_; ++i) {
    const cplx d = grid_pos_[i] - anchor_;
    double th = std::arg(d);
    while (th < prev) th += two_pi;
    if (th - prev > pi)
      throw std::invalid_argument(label_ + ": parametrization is not positively oriented");
    grid_theta_[i] = th;
    grid_r_[i] = std::abs(d);
    prev = th;
  }
  if (std::abs(grid_theta_[grid_n_] - grid_theta_[0] - two_pi) > 1e-9)
    throw std::invalid_argument(label_ + ": boundary does not wind once about its anchor");
}

double BoundaryTable::partial_arclength(double u) const {
  const double step = two_pi / grid_n_;
  int i = std::clamp((int)(u / step), 0, grid_n_ - 1);
  auto spd = [this](double x) { return std::abs(curve_.velocity(x)); };
  return grid_cumlen_[i] + fixed_gl16(spd, step * i, u);
}

double BoundaryTable::arclength(double u) const {
  const double lap = std::floor(u / two_pi);
  const double r = u - two_pi * lap;
  return lap * length_ + partial_arclength(r);
}

double BoundaryTable::param_at_arclength(double s) const {
  const double lap = std::floor(s / length_);
  const double r = s - lap * length_;
  auto it = std::upper_bound(grid_cumlen_.begin(), grid_cumlen_.end(), r);
  int i = std::clamp(int(it - grid_cumlen_.begin()) - 1, 0, grid_n_ - 1);
  const double step = two_pi / grid_n_;
  double u = step * (i + (r - grid_cumlen_[i]) /
                             std::max(1e-300, grid_cumlen_[i + 1] - grid_cumlen_[i]));
  for (int iter = 0; iter < 8; ++iter) {
    const double f = partial_arclength(u) - r;
    const double d = std::abs(curve_.velocity(u));
    const double du = f / d;
    u -= du;
    if (std::abs(du) < 1e-14) break;
  }
  return u + lap * two_pi;
}

double BoundaryTable::radial_param_seed(double theta) const {
  // lift theta into [theta0, theta0 + 2pi)
  double t = grid_theta_[0] + wrap_2pi(theta - grid_theta_[0]);
  auto it = std::upper_bound(grid_theta_.begin(), grid_theta_.end(), t);
  int i = std::clamp(int(it - grid_theta_.begin()) - 1, 0, grid_n_ - 1);
  const double step = two_pi / grid_n_;
  const double w = (t - grid_theta_[i]) / std::max(1e-300, grid_theta_[i + 1] - grid_theta_[i]);
  return step * (i + w);
}

double BoundaryTable::radial_param(cplx x) const {
  const cplx d = x - anchor_;
  const double rq = std::abs(d);
  if (rq == 0.0) return 0.0;
  const cplx e = d / rq;
  double u = radial_param_seed(std::arg(d));
  for (int iter = 0; iter < 12; ++iter) {
    const cplx g = curve_.position(u) - anchor_;
    const double f = cross(e, g);
    const double df = cross(e, curve_.velocity(u));
    const double du = f / df;
    u -= du;
    if (std::abs(du) < 1e-14) break;
  }
  // the backward exit also zeroes the deflection; reject it
  if (dot(curve_.position(u) - anchor_, e) < 0.0)
    throw GeometryError("radial_param: converged to the antipodal exit");
  return u;
}

double BoundaryTable::boundary_offset(cplx x) const {
  const cplx d = x - anchor_;
  const double rq = std::abs(d);
  if (rq == 0.0) return -grid_r_[0];  // anchor is well inside
  const double u = radial_param(x);
  return rq - std::abs(curve_.position(u) - anchor_);
}

double BoundaryTable::boundary_offset_coarse(cplx x) const {
  const cplx d = x - anchor_;
  const double rq = std::abs(d);
  if (rq == 0.0) return -grid_r_[0];
  double t = grid_theta_[0] + wrap_2pi(std::arg(d) - grid_theta_[0]);
  auto it = std::upper_bound(grid_theta_.begin(), grid_theta_.end(), t);
  int i = std::clamp(int(it - grid_theta_.begin()) - 1, 0, grid_n_ - 1);
  const double w = (t - grid_theta_[i]) / std::max(1e-300, grid_theta_[i + 1] - grid_theta_[i]);
  return rq - ((1 - w) * grid_r_[i] + w * grid_r_[i + 1]);
}

RayHit BoundaryTable::ray_exit(cplx p, cplx dir) const {
  if (std::abs(dir) == 0.0) throw std::invalid_argument("ray_exit: zero direction");
  if (boundary_offset(p) >= -1e-13 * diameter_)
    throw GeometryError("ray_exit: origin is not strictly inside the table");
  const cplx e = unit(dir);

  // the line through an interior point meets the boundary exactly twice;
  // locate both sign changes of the deflection and keep the forward one
  auto deflect = [&](double u) { return cross(e, curve_.position(u) - p); };
  auto polish = [&](double a, double b, double fa, double fb) {
    return polish_root(deflect,
                       [&](double u) { return cross(e, curve_.velocity(u)); }, a, b,
                       fa, fb, 1e-15 * two_pi);
  };

  for (int n : {64, grid_n_}) {
    const double step = two_pi / n;
    double ua = 0.0, fa = deflect(0.0);
    for (int i = 1; i <= n; ++i) {
      const double ub = step * i;
      const double fb = deflect(ub);
      if (fa == 0.0 || (fa > 0) != (fb > 0)) {
        const double u = fa == 0.0 ? ua : polish(ua, ub, fa, fb);
        const cplx q = curve_.position(u);
        if (dot(q - p, e) > 0.0) {
          RayHit hit;
          hit.u = wrap_2pi(u);
          hit.point = q;
          hit.t = dot(q - p, e);
          hit.residual = std::abs(cross(e, q - p));
          if (hit.residual > 1e-11 * diameter_)
            throw GeometryError("ray_exit: residual above tolerance");
          return hit;
        }
      }
      ua = ub;
      fa = fb;
    }
  }
  throw GeometryError("ray_exit: no forward intersection found");
}

RayHit BoundaryTable::chord_exit(double u0, cplx dir) const {
  if (std::abs(dir) == 0.0) throw std::invalid_argument("chord_exit: zero direction");
  const cplx e = unit(dir);
  const cplx q0 = curve_.position(u0);
  auto deflect = [&](double u) { return cross(e, curve_.position(u) - q0); };
  const double slope = cross(e, curve_.velocity(u0));
  if (slope == 0.0) throw GeometryError("chord_exit: direction is tangent at the start");
  const double s0 = slope > 0 ? 1.0 : -1.0;

  for (int n : {64, 1024}) {
    const double step = two_pi / n;
    double ua = u0, fa = 0.0;
    bool have_fa = false;
    for (int i = 1; i < n; ++i) {
      const double ub = u0 + step * i;
      const double fb = deflect(ub);
      if (!have_fa) {
        // seed the bracket start just past the trivial root at u0
        double eps = step * 1e-6;
        double fs = deflect(u0 + eps);
        int guard = 0;
        while (fs != 0.0 && (fs > 0) != (s0 > 0) && ++guard < 6) {
          eps *= 1e-2;
          fs = deflect(u0 + eps);
        }
        ua = u0 + eps;
        fa = fs;
        have_fa = true;
      }
      if ((fa > 0) != (fb > 0) || fb == 0.0) {
        const double u = fb == 0.0
                             ? ub
                             : polish_root(deflect,
                                           [&](double x) { return cross(e, curve_.velocity(x)); },
                                           ua, ub, fa, fb, 1e-15 * two_pi);
        const cplx q = curve_.position(u);
        const double t = dot(q - q0, e);
        if (t > 0.0) {
          RayHit hit;
          hit.u = wrap_2pi(u);
          hit.point = q;
          hit.t = t;
          hit.residual = std::abs(cross(e, q - q0));
          if (hit.residual > 1e-11 * diameter_)
            throw GeometryError("chord_exit: residual above tolerance");
          return hit;
        }
      }
      ua = ub;
      fa = fb;
    }
  }
  throw GeometryError("chord_exit: no forward intersection found");
}

// -------------------------------------------------------------------- makers

TablePtr make_ellipse(double a, double b) {
  if (!(a > 0) || !(b > 0)) throw std::invalid_argument("ellipse: semiaxes must be positive");
  Curve c;
  c.position = [a, b](double u) { return cplx(a * std::cos(u), b * std::sin(u)); };
  c.velocity = [a, b](double u) { return cplx(-a * std::sin(u), b * std::cos(u)); };
  c.acceleration = [a, b](double u) { return cplx(-a * std::cos(u), -b * std::sin(u)); };
  return std::make_shared<BoundaryTable>(std::move(c), "ellipse");
}

namespace {

// T(xi) = -i * sum_k a_k/(k+1) e^{i(k+1)xi}, summed over both signs of k.
// The constant is chosen so the curve has zero mean (centroid at origin).
Curve width_body_curve(const WidthSpec& spec) {
  struct Term {
    cplx coef;  // a_k / (k+1)
    int m;      // k+1
  };
  std::vector<Term> terms;
  for (const auto& [k, ak] : spec.a) {
    if (std::abs(ak) == 0.0) continue;
    terms.push_back({ak / double(k + 1), k + 1});
    if (k > 0) terms.push_back({std::conj(ak) / double(-k + 1), -k + 1});
  }
  Curve c;
  c.position = [terms](double xi) {
    cplx s = 0;
    for (const auto& t : terms) s += t.coef * std::polar(1.0, t.m * xi);
    return cplx(0, -1) * s;
  };
  c.velocity = [terms](double xi) {
    cplx s = 0;
    for (const auto& t : terms) s += t.coef * cplx(0, t.m) * std::polar(1.0, t.m * xi);
    return cplx(0, -1) * s;
  };
  c.acceleration = [terms](double xi) {
    cplx s = 0;
    for (const auto& t : terms)
      s += t.coef * cplx(0, t.m) * cplx(0, t.m) * std::polar(1.0, t.m * xi);
    return cplx(0, -1) * s;
  };
  return c;
}

// caustic (evolute) alpha(xi) = i * sum_k a_k * k/(k+1) e^{i(k+1)xi}
Curve width_caustic_curve(const WidthSpec& spec) {
  struct Term {
    cplx coef;
    int m;
  };
  std::vector<Term> terms;
  for (const auto& [k, ak] : spec.a) {
    if (std::abs(ak) == 0.0 || k == 0) continue;
    terms.push_back({ak * double(k) / double(k + 1), k + 1});
    terms.push_back({std::conj(ak) * double(-k) / double(-k + 1), -k + 1});
  }
  Curve c;
  c.position = [terms](double xi) {
    cplx s = 0;
    for (const auto& t : terms) s += t.coef * std::polar(1.0, t.m * xi);
    return cplx(0, 1) * s;
  };
  c.velocity = [terms](double xi) {
    cplx s = 0;
    for (const auto& t : terms) s += t.coef * cplx(0, t.m) * std::polar(1.0, t.m * xi);
    return cplx(0, 1) * s;
  };
  c.acceleration = [terms](double xi) {
    cplx s = 0;
    for (const auto& t : terms)
      s += t.coef * cplx(0, t.m) * cplx(0, t.m) * std::polar(1.0, t.m * xi);
    return cplx(0, 1) * s;
  };
  return c;
}

}  // namespace

WidthTable make_width_table(const WidthSpec& spec) {
  spec.validate();
  WidthTable out;
  out.spec = spec;
  out.body = width_body_curve(spec);
  out.caustic = width_caustic_curve(spec);
  out.table = std::make_shared<BoundaryTable>(width_body_curve(spec), "width-fourier");
  return out;
}

// -------------------------------------------------------------- StringTable

struct StringTable::Locals {
  cplx e, ie, q, qd, qdd;
  double rho, drho, N, Nd, Ndd, D, Dd, Ddd, s, sd, sdd;
};

StringTable::StringTable(const StringSpec& spec) : spec_(spec), body_(width_body_curve(spec.body)) {
  spec_.body.validate();
  if (!(spec_.length > 0)) throw std::invalid_argument("string spec: length must be positive");
  double fmax = 0.0;
  for (int i = 0; i < kValidationSamples; ++i) {
    const double xi = two_pi * i / kValidationSamples;
    fmax = std::max(fmax, std::abs(body_.position(xi) - spec_.center));
  }
  if (spec_.length < fmax)
    throw std::invalid_argument(
        "string spec: string length is shorter than the farthest body point from the center");
}

StringTable::Locals StringTable::eval(double xi) const {
  Locals L;
  L.e = std::polar(1.0, xi);
  L.ie = perp(L.e);
  L.q = body_.position(xi) - spec_.center;
  L.qd = body_.velocity(xi);    // rho * e
  L.qdd = body_.acceleration(xi);
  L.rho = spec_.body.rho(xi);
  L.drho = spec_.body.drho(xi);
  const double l = spec_.length;
  L.N = l * l - sqnorm(L.q);
  L.Nd = -2.0 * dot(L.q, L.qd);
  L.Ndd = -2.0 * (dot(L.qd, L.qd) + dot(L.q, L.qdd));
  L.D = l - dot(L.q, L.ie);
  L.Dd = dot(L.q, L.e);  // tangential term vanishes: <qd, ie> = 0
  L.Ddd = L.rho + dot(L.q, L.ie);
  L.s = L.N / (2.0 * L.D);
  L.sd = (L.Nd - 2.0 * L.s * L.Dd) / (2.0 * L.D);
  L.sdd = (L.Ndd - 4.0 * L.sd * L.Dd - 2.0 * L.s * L.Ddd) / (2.0 * L.D);
  return L;
}

cplx StringTable::position(double xi) const {
  const Locals L = eval(xi);
  return spec_.center + L.q - L.s * L.ie;
}

cplx StringTable::velocity(double xi) const {
  const Locals L = eval(xi);
  return (L.rho + L.s) * L.e - L.sd * L.ie;
}

cplx StringTable::acceleration(double xi) const {
  const Locals L = eval(xi);
  return (L.drho + 2.0 * L.sd) * L.e + (L.rho + L.s - L.sdd) * L.ie;
}

double StringTable::s(double xi) const { return eval(xi).s; }

StringTableResult make_string_table(const StringSpec& spec) {
  auto st = std::make_shared<StringTable>(spec);
  Curve c;
  c.position = [st](double xi) { return st->position(xi); };
  c.velocity = [st](double xi) { return st->velocity(xi); };
  c.acceleration = [st](double xi) { return st->acceleration(xi); };
  StringTableResult out;
  out.detail = st;
  out.table = std::make_shared<BoundaryTable>(std::move(c), "string");
  return out;
}

// ------------------------------------------------------------------ queries

BodyDistance distance_to_body(cplx x, const Curve& body) {
  const int n = 1024;
  int best = 0;
  double best_d = 1e300;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(x - body.position(two_pi * i / n));
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  double xi = two_pi * best / n;
  for (int iter = 0; iter < 30; ++iter) {
    const cplx r = x - body.position(xi);
    const cplx v = body.velocity(xi);
    const cplx a = body.acceleration(xi);
    const double g = dot(r, v);
    const double dg = dot(r, a) - dot(v, v);
    if (dg == 0.0) break;
    const double step = g / dg;
    xi -= step;
    if (std::abs(step) < 1e-15) break;
  }
  BodyDistance out;
  out.foot_param = wrap_2pi(xi);
  out.foot = body.position(xi);
  const cplx r = x - out.foot;
  out.distance = std::abs(r);
  // inward side test: for a CCW body the inward normal at xi is perp(tangent)
  if (dot(r, perp(unit(body.velocity(xi)))) > 0.0) out.distance = -out.distance;
  return out;
}

std::vector<CurveSample> sample_curve(const BoundaryTable& table, int n) {
  std::vector<CurveSample> rows(n);
  for (int i = 0; i < n; ++i) {
    const double u = two_pi * i / n;
    rows[i] = {u, table.position(u), table.curvature(u)};
  }
  return rows;
}

std::vector<CurveSample> sample_curve(const Curve& curve, int n) {
  std::vector<CurveSample> rows(n);
  for (int i = 0; i < n; ++i) {
    const double u = two_pi * i / n;
    rows[i] = {u, curve.position(u), curve.curvature(u)};
  }
  return rows;
}

}  // namespace kb
