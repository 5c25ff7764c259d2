#pragma once

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "kb/geom.hpp"

namespace kb {

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Poor man's analytic curve: closed, parameter period 2pi, CCW.
struct Curve {
  std::function<cplx(double)> position;
  std::function<cplx(double)> velocity;      // d/du
  std::function<cplx(double)> acceleration;  // d2/du2
  double curvature(double u) const {
    const cplx v = velocity(u), a = acceleration(u);
    const double s = std::abs(v);
    return cross(v, a) / (s * s * s);
  }
};

// Fourier data for a constant-width body boundary. Coefficients are stored
// for k >= 0; negative indices are implied by a[-k] = conj(a[k]) so that the
// radius of curvature rho(xi) = sum a_k e^{ik xi} is real.
struct WidthSpec {
  std::map<int, cplx> a;

  double a0() const;
  void validate() const;  // a0 real > 0, a1 = 0, even harmonics vanish
  double rho(double xi) const;
  double drho(double xi) const;
};

struct StringSpec {
  WidthSpec body;
  cplx center;    // the point the strings are anchored at
  double length;  // total string length (must dominate max |T - c|)
};

struct RayHit {
  double u = 0;       // boundary parameter of the exit point
  cplx point;         // position(u)
  double t = 0;       // ray coordinate: point = origin + t*dir
  double residual = 0;
};

class BoundaryTable;
using TablePtr = std::shared_ptr<const BoundaryTable>;

// Strictly convex closed boundary with cached geometry. Construction runs the
// full validation pass (closure, periodicity, convexity) and throws on any
// violation rather than producing a half-usable table.
class BoundaryTable {
 public:
  BoundaryTable(Curve curve, std::string label);

  cplx position(double u) const { return curve_.position(u); }
  cplx velocity(double u) const { return curve_.velocity(u); }
  cplx acceleration(double u) const { return curve_.acceleration(u); }
  double curvature(double u) const { return curve_.curvature(u); }
  double speed(double u) const { return std::abs(curve_.velocity(u)); }
  cplx unit_tangent(double u) const { return unit(curve_.velocity(u)); }
  cplx inward_normal(double u) const { return perp(unit_tangent(u)); }
  const std::string& label() const { return label_; }

  double arclength(double u) const;          // additive across laps, 0 at u=0
  double param_at_arclength(double s) const;
  double total_length() const { return length_; }
  double min_curvature() const { return kappa_min_; }
  double max_curvature() const { return kappa_max_; }
  double diameter() const { return diameter_; }
  cplx anchor() const { return anchor_; }  // a strictly interior point

  // Signed distance proxy along the ray from the anchor: negative inside,
  // zero on the curve. Exact variant polishes the radial exit with Newton.
  double boundary_offset(cplx x) const;
  double boundary_offset_coarse(cplx x) const;
  bool contains(cplx x) const { return boundary_offset(x) < 0.0; }
  // parameter of the boundary point on the ray anchor -> x
  double radial_param(cplx x) const;

  // Exit of the ray p + t*dir, t > 0, for p strictly inside.
  RayHit ray_exit(cplx p, cplx dir) const;
  // Second intersection of the line through position(u0) along dir (inward).
  RayHit chord_exit(double u0, cplx dir) const;

 private:
  double partial_arclength(double u) const;  // u in [0, 2pi]
  double radial_param_seed(double theta) const;

  Curve curve_;
  std::string label_;
  int grid_n_;
  std::vector<cplx> grid_pos_;
  std::vector<double> grid_cumlen_;
  std::vector<double> grid_theta_;  // monotone lift of arg(pos - anchor)
  std::vector<double> grid_r_;      // |pos - anchor|
  double length_ = 0, kappa_min_ = 0, kappa_max_ = 0, diameter_ = 0;
  cplx anchor_;
};

struct CurveSample {
  double u;
  cplx point;
  double kappa;
};

TablePtr make_ellipse(double a, double b);

struct WidthTable {
  TablePtr table;
  Curve body;     // same curve the table wraps
  Curve caustic;  // evolute; degenerates to a point for the disk
  WidthSpec spec;
};
WidthTable make_width_table(const WidthSpec& spec);

// The string table: level set |x - c| + dist(x, body) = length, traced in the
// body's normal parametrization. Keeps the body and the offset function s(xi)
// around because the focal machinery wants them.
class StringTable;
struct StringTableResult {
  TablePtr table;
  std::shared_ptr<const StringTable> detail;
};
StringTableResult make_string_table(const StringSpec& spec);

class StringTable {
 public:
  explicit StringTable(const StringSpec& spec);
  cplx position(double xi) const;
  cplx velocity(double xi) const;
  cplx acceleration(double xi) const;
  double s(double xi) const;  // distance from gamma(xi) to the body
  const StringSpec& spec() const { return spec_; }
  const Curve& body() const { return body_; }

 private:
  struct Locals;
  Locals eval(double xi) const;
  StringSpec spec_;
  Curve body_;
};

struct BodyDistance {
  double distance;  // negative when x is inside the body
  double foot_param;
  cplx foot;
};
BodyDistance distance_to_body(cplx x, const Curve& body);

std::vector<CurveSample> sample_curve(const BoundaryTable& table, int n);
std::vector<CurveSample> sample_curve(const Curve& curve, int n);

}  // namespace kb
