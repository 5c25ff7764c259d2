#pragma once

#include <cmath>
#include <stdexcept>

namespace kb {

// Safeguarded Newton inside a sign-change bracket [a,b]. Falls back to
// bisection whenever the Newton step leaves the bracket or stalls.
// f must carry a sign change: f(a)*f(b) <= 0.
template <class F, class DF>
double polish_root(F&& f, DF&& df, double a, double b, double fa, double fb,
                   double xtol, int max_iter = 80) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0) == (fb > 0)) throw std::invalid_argument("polish_root: no sign change");
  double x = 0.5 * (a + b);
  double fx = f(x);
  for (int it = 0; it < max_iter; ++it) {
    if (fx == 0.0) return x;
    if ((fx > 0) == (fb > 0)) {
      b = x;
      fb = fx;
    } else {
      a = x;
      fa = fx;
    }
    if (std::abs(b - a) < xtol) return 0.5 * (a + b);
    const double d = df(x);
    double xn = (d != 0.0) ? x - fx / d : a;
    if (!(xn > a && xn < b)) xn = 0.5 * (a + b);
    if (std::abs(xn - x) < 0.25 * xtol) return xn;
    x = xn;
    fx = f(x);
  }
  return x;
}

// Plain bisection for when no cheap derivative is at hand.
template <class F>
double bisect_root(F&& f, double a, double b, double fa, double fb, double xtol,
                   int max_iter = 200) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0) == (fb > 0)) throw std::invalid_argument("bisect_root: no sign change");
  for (int it = 0; it < max_iter && std::abs(b - a) > xtol; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0) == (fb > 0)) {
      b = m;
      fb = fm;
    } else {
      a = m;
      fa = fm;
    }
  }
  return 0.5 * (a + b);
}

// Newton iteration for smooth scalar equations with a good initial guess.
// Returns NaN if it fails to settle; callers decide how to recover.
template <class F, class DF>
double newton_root(F&& f, DF&& df, double x0, double xtol, int max_iter = 50) {
  double x = x0;
  for (int it = 0; it < max_iter; ++it) {
    const double fx = f(x);
    const double d = df(x);
    if (d == 0.0) return std::nan("");
    const double step = fx / d;
    x -= step;
    if (std::abs(step) < xtol) return x;
  }
  return std::nan("");
}

}  // namespace kb
