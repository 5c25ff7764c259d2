#include "kb/kepler_arc.hpp"

#include <cmath>

#include "kb/quadrature.hpp"

namespace kb {

const char* to_string(ArcClass cls) {
  switch (cls) {
    case ArcClass::Direct: return "direct";
    case ArcClass::Indirect: return "indirect";
    case ArcClass::CCW: return "ccw";
    case ArcClass::CW: return "cw";
  }
  return "?";
}

LcSetup lc_setup(cplx p0, cplx p1, ArcClass cls, double h, double mu) {
  if (!(h > 0) || !(mu > 0))
    throw std::invalid_argument("lc_setup: requires h > 0 and mu > 0");
  if (p0 == cplx(0, 0) || p1 == cplx(0, 0))
    throw std::invalid_argument("lc_setup: endpoint at the center");

  const cplx w0 = std::sqrt(p0);
  const cplx r1 = std::sqrt(p1);

  double sign = 0;
  switch (cls) {
    case ArcClass::Direct:
    case ArcClass::Indirect: {
      const double d = dot(w0, r1);
      if (d == 0)
        throw AmbiguousBranch(
            "lc_setup: endpoints are antipodal, direct/indirect class is "
            "ambiguous; use ccw or cw");
      sign = (d > 0) ? 1 : -1;
      if (cls == ArcClass::Indirect) sign = -sign;
      break;
    }
    case ArcClass::CCW:
    case ArcClass::CW: {
      const double c = cross(w0, r1);
      if (c == 0)
        throw AmbiguousBranch(
            "lc_setup: endpoints are radially aligned, ccw/cw class is "
            "ambiguous; use direct or indirect");
      sign = (c > 0) ? 1 : -1;
      if (cls == ArcClass::CW) sign = -sign;
      break;
    }
  }
  return LcSetup{w0, sign * r1, mu / (2 * h)};
}

double lc_time(cplx w0, cplx w1, double h_reg) {
  if (!(h_reg > 0)) throw std::invalid_argument("lc_time: requires h_reg > 0");
  const double s = dot(w0, w1);
  const double q = sqnorm(w0) + sqnorm(w1);

  // Solve for Y = X - 2 >= 0 where X = 2 cosh(T); substituting gives
  //   h_reg Y^2 + (4 h_reg + 2 s) Y - 2 (q - 2 s) = 0,
  // and q - 2s = |w0 - w1|^2 >= 0, so the product of roots is <= 0 and the
  // nonnegative root is the transit. Pick the quadratic branch that avoids
  // cancellation: for b > 0 the root is -2c / (b + sqrt(...)).
  const double b = 4 * h_reg + 2 * s;
  const double c = -2 * (q - 2 * s);
  const double disc = std::sqrt(b * b - 4 * h_reg * c);
  double y;
  if (b > 0)
    y = -2 * c / (b + disc);
  else
    y = (-b + disc) / (2 * h_reg);
  // X = y + 2 >= 2 always holds in exact arithmetic; anything visibly below
  // that means the inputs were not a valid configuration.
  if (y < -1e-9) throw ArcError("lc_time: transit equation has no solution");
  if (y < 0) y = 0;

  // T = arcosh(1 + y/2), written to stay accurate near y = 0.
  const double d = y / 2;
  return std::log1p(d + std::sqrt(d * (2 + d)));
}

LcPath lc_path(cplx w0, cplx w1, double T) {
  if (!(T > 0)) throw std::invalid_argument("lc_path: requires T > 0");
  const double ep = std::exp(T), em = std::exp(-T);
  const double denom = ep - em;
  return LcPath{(w1 - w0 * em) / denom, (w0 * ep - w1) / denom, T};
}

cplx LcPath::w(double tau) const { return A * std::exp(tau) + B * std::exp(-tau); }
cplx LcPath::dw(double tau) const { return A * std::exp(tau) - B * std::exp(-tau); }

double jacobi_length(const LcPath& path, double h, double mu, double rel_tol) {
  const double scale = 2 / std::sqrt(h);
  auto f = [&](double tau) { return scale * (h * sqnorm(path.w(tau)) + mu); };
  QuadResult q = integrate(f, 0, path.T, rel_tol, 0);
  if (!q.converged) throw ArcError("jacobi_length: quadrature did not converge");
  return q.value;
}

namespace {

// min over the arc of |w(tau)|^2; the interior critical value is
// 2|A||B| + 2 Re(A conj(B)) attained at tau = log(|B|/|A|) / 2.
double min_sqnorm_w(const LcPath& p) {
  const double na = std::abs(p.A), nb = std::abs(p.B);
  double best = std::min(sqnorm(p.w(0)), sqnorm(p.w(p.T)));
  if (na > 0 && nb > 0) {
    const double tau_star = 0.5 * std::log(nb / na);
    if (tau_star > 0 && tau_star < p.T) {
      const double interior = 2 * na * nb + 2 * dot(p.A, p.B);
      best = std::min(best, std::max(interior, 0.0));
    }
  }
  return best;
}

cplx physical_velocity(cplx w, cplx dw, double h, double mu) {
  const double r = sqnorm(w);
  const double speed = std::sqrt(2 * (h + mu / r));
  return speed * unit(w * dw);
}

}  // namespace

cplx KeplerArc::velocity(double tau) const {
  return physical_velocity(path.w(tau), path.dw(tau), h, mu);
}

KeplerArc solve_arc(cplx p0, cplx p1, ArcClass cls, double h, double mu,
                    double quad_rel_tol) {
  KeplerArc arc;
  arc.p0 = p0;
  arc.p1 = p1;
  arc.h = h;
  arc.mu = mu;
  arc.cls = cls;
  arc.setup = lc_setup(p0, p1, cls, h, mu);

  const cplx w0 = arc.setup.w0, w1 = arc.setup.w1;
  const double T = lc_time(w0, w1, arc.setup.h_reg);
  if (!(T > 0)) throw ArcError("solve_arc: coincident endpoints");
  arc.path = lc_path(w0, w1, T);

  arc.length = jacobi_length(arc.path, h, mu, quad_rel_tol);
  arc.r_min = min_sqnorm_w(arc.path);
  arc.v0 = physical_velocity(w0, arc.path.dw(0), h, mu);
  arc.v1 = physical_velocity(w1, arc.path.dw(T), h, mu);

  // Physical time follows from dt = sqrt(2/h) |w|^2 dtau, which has a closed
  // form for the exponential path.
  const cplx A = arc.path.A, B = arc.path.B;
  const double e2 = std::exp(2 * T), em2 = std::exp(-2 * T);
  const double int_w2 = sqnorm(A) * (e2 - 1) / 2 + sqnorm(B) * (1 - em2) / 2 +
                        2 * dot(A, B) * T;
  arc.transit_time = std::sqrt(2 / h) * int_w2;
  return arc;
}

LengthGradient length_gradient(const KeplerArc& arc) {
  const double m0 = std::sqrt(arc.h + arc.mu / std::abs(arc.p0));
  const double m1 = std::sqrt(arc.h + arc.mu / std::abs(arc.p1));
  return LengthGradient{-m0 * unit(arc.v0), m1 * unit(arc.v1)};
}

cplx length_gradient_regularized_p1(const KeplerArc& arc) {
  const cplx w1 = arc.path.w(arc.path.T);
  return std::sqrt(arc.h) * (w1 * arc.path.dw(arc.path.T)) / sqnorm(w1);
}

}  // namespace kb
