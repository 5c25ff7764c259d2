#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace kb {

// The plane is represented by std::complex<double> throughout: positions,
// velocities and regularized coordinates all live in the same field, which
// keeps the square-root change of variables a one-liner.
using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline double dot(cplx a, cplx b) { return a.real() * b.real() + a.imag() * b.imag(); }
inline double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }
inline double sqnorm(cplx a) { return dot(a, a); }

inline cplx unit(cplx a) { return a / std::abs(a); }

// rotate by +90 degrees
inline cplx perp(cplx a) { return cplx(-a.imag(), a.real()); }

// principal value in (-pi, pi]
inline double wrap_pi(double x) {
  double y = std::remainder(x, two_pi);
  if (y <= -pi) y += two_pi;
  return y;
}

// representative in [0, 2pi)
inline double wrap_2pi(double x) {
  double y = std::fmod(x, two_pi);
  if (y < 0) y += two_pi;
  return y;
}

// circular distance between two angles, in [0, pi]
inline double angle_gap(double a, double b) { return std::abs(wrap_pi(a - b)); }

inline double clamp_unit(double x) { return x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace kb
