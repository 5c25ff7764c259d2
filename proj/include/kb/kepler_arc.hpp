#pragma once

#include <stdexcept>
#include <string>

#include "kb/geom.hpp"

namespace kb {

struct ArcError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Both square-root lifts of the requested endpoint qualify equally; the
// caller has to perturb the pair or ask for a rotational class instead.
struct AmbiguousBranch : ArcError {
  using ArcError::ArcError;
};

// Homotopy class of the arc between two points, relative to the attracting
// center at the origin. Direct stays on the segment side, Indirect passes by
// the center, CCW/CW select the sign of the angular momentum and are meant
// for near-antipodal pairs.
enum class ArcClass { Direct, Indirect, CCW, CW };

const char* to_string(ArcClass cls);

struct LcSetup {
  cplx w0, w1;   // square-root lifts of the endpoints
  double h_reg;  // energy of the regularized oscillator: mu / (2h)
};

// Pick the square-root lifts that realize the requested class. The rules are
// branch-cut free: Direct/Indirect by the sign of <w0,w1>, CCW/CW by the sign
// of det(w0,w1), which is proportional to the conserved angular momentum of
// the regularized motion.
LcSetup lc_setup(cplx p0, cplx p1, ArcClass cls, double h, double mu);

// Regularized transit time: with X = 2 cosh(T) the energy constraint reads
// h_reg X^2 + 2<w0,w1> X - 2(|w0|^2 + |w1|^2) - 4 h_reg = 0.
double lc_time(cplx w0, cplx w1, double h_reg);

// w(tau) = A e^tau + B e^-tau interpolating w0 at 0 and w1 at T.
struct LcPath {
  cplx A, B;
  double T = 0;
  cplx w(double tau) const;
  cplx dw(double tau) const;
};
LcPath lc_path(cplx w0, cplx w1, double T);

struct KeplerArc {
  cplx p0, p1;  // endpoints relative to the center
  double h = 0, mu = 0;
  ArcClass cls = ArcClass::Direct;
  LcSetup setup;
  LcPath path;
  double length = 0;        // Jacobi length
  double r_min = 0;         // closest approach to the center along the arc
  double transit_time = 0;  // physical time of flight
  cplx v0, v1;              // physical velocities at departure and arrival

  cplx position(double tau) const { return path.w(tau) * path.w(tau); }
  cplx velocity(double tau) const;  // physical dz/dt
};

KeplerArc solve_arc(cplx p0, cplx p1, ArcClass cls, double h, double mu,
                    double quad_rel_tol = 1e-12);

// Jacobi length by adaptive quadrature in regularized time; the integrand is
// (2/sqrt(h)) (h |w|^2 + mu), smooth even across close encounters.
double jacobi_length(const LcPath& path, double h, double mu, double rel_tol = 1e-12);

struct LengthGradient {
  cplx g0, g1;  // gradients of the length in p0 and p1
};
LengthGradient length_gradient(const KeplerArc& arc);

// Equivalent endpoint-gradient expression evaluated purely in regularized
// variables: sqrt(h) * (w1 * w'(T)) / |w1|^2. Kept for cross-checking.
cplx length_gradient_regularized_p1(const KeplerArc& arc);

}  // namespace kb
