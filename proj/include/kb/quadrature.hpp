#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kb {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // accumulated error estimate
  int evaluations = 0;
  bool converged = true;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod pair on [-1,1]
inline constexpr double gk_nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr double gk_wk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr double gk_wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
inline void gk15(F&& f, double a, double b, double& kronrod, double& err) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(mid);
  double gauss = fc * gk_wg[3];
  kronrod = fc * gk_wk[7];
  for (int j = 0; j < 7; ++j) {
    const double x = half * gk_nodes[j];
    const double fsum = f(mid - x) + f(mid + x);
    kronrod += fsum * gk_wk[j];
    if (j % 2 == 1) gauss += fsum * gk_wg[j / 2];
  }
  kronrod *= half;
  gauss *= half;
  err = std::abs(kronrod - gauss);  // conservative for smooth integrands
}

// 16-point Gauss-Legendre, used for the cached arclength tables where the
// integrand is analytic and the subinterval is already short.
inline constexpr double gl16_x[8] = {
    0.0950125098376374401853193, 0.2816035507792589132304605,
    0.4580167776572273863424194, 0.6178762444026437484466718,
    0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
inline constexpr double gl16_w[8] = {
    0.1894506104550684962853967, 0.1826034150449235888667637,
    0.1691565193950025381893121, 0.1495959888165767320815017,
    0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

}  // namespace detail

template <class F>
double fixed_gl16(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int j = 0; j < 8; ++j) {
    const double x = half * detail::gl16_x[j];
    acc += detail::gl16_w[j] * (f(mid - x) + f(mid + x));
  }
  return acc * half;
}

// Adaptive bisection with a worst-interval-first stack. Stops when the sum of
// interval error estimates satisfies err < max(abs_tol, rel_tol*|value|).
template <class F>
QuadResult integrate(F&& f, double a, double b, double rel_tol = 1e-12,
                     double abs_tol = 1e-14, int max_intervals = 4096) {
  struct Interval {
    double a, b, value, error;
  };
  QuadResult out;
  if (a == b) return out;

  double v, e;
  detail::gk15(f, a, b, v, e);
  out.evaluations = 15;
  std::vector<Interval> stack{{a, b, v, e}};
  double total = v, total_err = e;

  while ((int)stack.size() < max_intervals) {
    if (total_err <= std::max(abs_tol, rel_tol * std::abs(total))) break;
    // split the interval with the largest error estimate
    std::size_t worst = 0;
    for (std::size_t i = 1; i < stack.size(); ++i)
      if (stack[i].error > stack[worst].error) worst = i;
    Interval iv = stack[worst];
    stack.erase(stack.begin() + worst);
    const double m = 0.5 * (iv.a + iv.b);
    double v1, e1, v2, e2;
    detail::gk15(f, iv.a, m, v1, e1);
    detail::gk15(f, m, iv.b, v2, e2);
    out.evaluations += 30;
    total += v1 + v2 - iv.value;
    total_err += e1 + e2 - iv.error;
    stack.push_back({iv.a, m, v1, e1});
    stack.push_back({m, iv.b, v2, e2});
    if (m == iv.a || m == iv.b) break;  // interval at rounding limit
  }

  total = 0.0;
  total_err = 0.0;
  for (const auto& iv : stack) {
    total += iv.value;
    total_err += iv.error;
  }
  out.value = total;
  out.error = total_err;
  out.converged = total_err <= std::max(abs_tol, rel_tol * std::abs(total)) * 4.0 + 1e-300;
  return out;
}

}  // namespace kb
