#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "kb/kepler_arc.hpp"
#include "kb/quadrature.hpp"
#include "oracles.hpp"

using namespace kb;

namespace {

double reg_energy(const LcPath& p, double tau) {
  return 0.5 * sqnorm(p.dw(tau)) - 0.5 * sqnorm(p.w(tau));
}

// closed-form Jacobi length of the exponential path, used to cross-check the
// adaptive quadrature
double length_closed_form(const LcPath& p, double h, double mu) {
  const double e2 = std::exp(2 * p.T), em2 = std::exp(-2 * p.T);
  const double int_w2 = sqnorm(p.A) * (e2 - 1) / 2 + sqnorm(p.B) * (1 - em2) / 2 +
                        2 * dot(p.A, p.B) * p.T;
  return (2 / std::sqrt(h)) * (h * int_w2 + mu * p.T);
}

double winding(const KeplerArc& arc, int n = 2048) {
  double total = 0;
  double prev = std::arg(arc.position(0));
  for (int i = 1; i <= n; ++i) {
    const double cur = std::arg(arc.position(arc.path.T * i / n));
    total += wrap_pi(cur - prev);
    prev = cur;
  }
  return total;
}

}  // namespace

TEST_CASE("branch selection picks the lift matching the requested class") {
  const cplx p0(1, 0), p1(0, 1);
  const cplx r1 = std::polar(1.0, pi / 4);

  auto s = lc_setup(p0, p1, ArcClass::Direct, 1.0, 1.0);
  CHECK(std::abs(s.w0 - cplx(1, 0)) < 1e-15);
  CHECK(std::abs(s.w1 - r1) < 1e-15);
  CHECK(dot(s.w0, s.w1) == doctest::Approx(std::sqrt(2) / 2));
  CHECK(s.h_reg == doctest::Approx(0.5));

  auto si = lc_setup(p0, p1, ArcClass::Indirect, 1.0, 1.0);
  CHECK(std::abs(si.w1 + r1) < 1e-15);

  // antipodal pair: rotational classes stay well defined, the + sign wins ccw
  auto sa = lc_setup(p0, cplx(-1, 0), ArcClass::CCW, 1.0, 1.0);
  CHECK(std::abs(sa.w1 - cplx(0, 1)) < 1e-15);
  auto sc = lc_setup(p0, cplx(-1, 0), ArcClass::CW, 1.0, 1.0);
  CHECK(std::abs(sc.w1 + cplx(0, 1)) < 1e-15);

  CHECK_THROWS_AS(lc_setup(p0, cplx(-2, 0), ArcClass::Direct, 1, 1), AmbiguousBranch);
  CHECK_THROWS_AS(lc_setup(p0, cplx(3, 0), ArcClass::CCW, 1, 1), AmbiguousBranch);
  CHECK_THROWS_AS(lc_setup(cplx(0, 0), p1, ArcClass::Direct, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(lc_setup(p0, p1, ArcClass::Direct, -1, 1), std::invalid_argument);
}

TEST_CASE("transit time solves the energy constraint") {
  // orthogonal unit lifts at h' = 1: X = sqrt(8)
  const double T = lc_time(cplx(1, 0), cplx(0, 1), 1.0);
  CHECK(T == doctest::Approx(std::acosh(std::sqrt(2))).epsilon(1e-14));

  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> ang(-pi, pi), rad(0.4, 2.0),
      he(-6.0, 1.0);
  for (int it = 0; it < 200; ++it) {
    const cplx w0 = std::polar(rad(rng), ang(rng));
    const cplx w1 = std::polar(rad(rng), ang(rng));
    if (std::abs(w0 - w1) < 1e-3) continue;
    const double h_reg = std::pow(10.0, he(rng));
    const double T2 = lc_time(w0, w1, h_reg);
    REQUIRE(T2 > 0);
    const LcPath p = lc_path(w0, w1, T2);
    // the path realizes the prescribed regularized energy at both ends
    CHECK(std::abs(reg_energy(p, 0) - h_reg) < 1e-10 * (1 + h_reg));
    CHECK(std::abs(reg_energy(p, T2) - h_reg) < 1e-10 * (1 + h_reg));
  }
}

TEST_CASE("transit time bound in the vanishing-energy regime") {
  // For <w0,w1> < 0 and h' -> 0, y = 1/X obeys y <= sqrt(h')/(2q) with
  // q = |w0|^2 + |w1|^2, provided |<w0,w1>| dominates sqrt(h'). The uniform
  // bound (all <w0,w1> <= 0) carries the weaker constant 1/sqrt(2q).
  for (double h_reg : {1e-4, 1e-6}) {
    for (double a : {0.6, 0.9, 1.2, 1.5, 2.2, 2.8}) {
      const cplx w0(1, 0);
      const cplx w1 = std::polar(1.0, pi - a / 2);  // sizable negative overlap
      const double s = dot(w0, w1);
      REQUIRE(s < -0.1);
      const double q = sqnorm(w0) + sqnorm(w1);
      const double X = 2 * std::cosh(lc_time(w0, w1, h_reg));
      CHECK(1 / X <= std::sqrt(h_reg) / (2 * q));
    }
    // sweep through the near-orthogonal seam with the uniform constant
    for (int i = 0; i <= 40; ++i) {
      const cplx w0(1, 0);
      const cplx w1 = std::polar(1.3, pi / 2 + 1e-12 + (pi / 2 - 1e-12) * i / 40.0);
      REQUIRE(dot(w0, w1) <= 0);
      const double q = sqnorm(w0) + sqnorm(w1);
      const double X = 2 * std::cosh(lc_time(w0, w1, h_reg));
      CHECK(1 / X <= std::sqrt(h_reg / (2 * q)) * (1 + 1e-9));
    }
  }
}

TEST_CASE("regularized path interpolates and matches the endpoint derivative") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> ang(-pi, pi), rad(0.5, 1.8);
  for (int it = 0; it < 100; ++it) {
    const cplx w0 = std::polar(rad(rng), ang(rng));
    const cplx w1 = std::polar(rad(rng), ang(rng));
    if (std::abs(w0 - w1) < 1e-3) continue;
    const double T = lc_time(w0, w1, 0.3);
    const LcPath p = lc_path(w0, w1, T);
    CHECK(std::abs(p.w(0) - w0) < 1e-12 * std::abs(w0));
    CHECK(std::abs(p.w(T) - w1) < 1e-12 * std::abs(w1));

    const double ep = std::exp(T), em = std::exp(-T);
    const cplx eq25 = (ep + em) / (ep - em) * w1 - 2.0 / (ep - em) * w0;
    CHECK(std::abs(p.dw(T) - eq25) < 1e-12 * std::abs(eq25));
  }
  CHECK_THROWS_AS(lc_path(cplx(1, 0), cplx(1, 0), 0.0), std::invalid_argument);
}

TEST_CASE("radial arcs reduce to a one-dimensional quadrature") {
  for (double lambda : {2.0, 5.0}) {
    for (double h : {1.0, 10.0, 100.0}) {
      const double mu = 1.5;
      const KeplerArc arc = solve_arc(cplx(1, 0), cplx(lambda, 0),
                                      ArcClass::Direct, h, mu);
      CHECK(arc.r_min == doctest::Approx(1.0).epsilon(1e-12));
      // Jacobi length of a monotone radial segment
      auto f = [&](double r) { return std::sqrt(h + mu / r); };
      const double oracle = integrate(f, 1.0, lambda, 1e-13, 0).value;
      CHECK(arc.length == doctest::Approx(oracle).epsilon(1e-10));
      // the path never leaves the ray
      for (int i = 0; i <= 32; ++i) {
        const cplx z = arc.position(arc.path.T * i / 32);
        CHECK(std::abs(z.imag()) < 1e-10 * lambda);
      }
      const LengthGradient g = length_gradient(arc);
      CHECK(std::abs(cross(g.g0, cplx(1, 0))) < 1e-10);
      CHECK(std::abs(cross(g.g1, cplx(1, 0))) < 1e-10);
    }
  }
}

TEST_CASE("direct and indirect arcs against the physical integrator") {
  struct Case {
    cplx p0, p1;
    ArcClass cls;
    double h, mu;
  };
  std::vector<Case> cases = {
      {{1, 0}, {0, 1}, ArcClass::Direct, 100, 1},
      {{1, 0}, {0, 1}, ArcClass::Indirect, 100, 1},
      {{1.3, 0.2}, {-0.4, 1.1}, ArcClass::Direct, 7, 2},
      {{1.3, 0.2}, {-0.4, 1.1}, ArcClass::Indirect, 7, 2},
      {{0.9, -0.5}, {-1.0, 0.4}, ArcClass::CCW, 20, 0.7},
      {{0.9, -0.5}, {-1.0, 0.4}, ArcClass::CW, 20, 0.7},
      {{2.0, 0.1}, {1.9, 0.3}, ArcClass::Direct, 3, 5},
      {{0.6, 0.0}, {-0.6, 0.05}, ArcClass::CCW, 50, 1},
  };
  for (const auto& cs : cases) {
    CAPTURE(to_string(cs.cls));
    CAPTURE(cs.h);
    const KeplerArc arc = solve_arc(cs.p0, cs.p1, cs.cls, cs.h, cs.mu);

    // departure data feeds a high-order integration of the physical equations;
    // it must arrive at p1 with velocity v1 after transit_time
    const oracle::OdeState end = oracle::integrate_kepler(
        cs.p0, arc.v0, cs.mu, cs.h, arc.transit_time, 1e-13);
    const double scale = std::abs(cs.p1);
    CHECK(std::abs(end.z - cs.p1) < 1e-7 * scale);
    CHECK(std::abs(end.v - arc.v1) < 1e-6 * std::abs(arc.v1));
    CHECK(end.length == doctest::Approx(arc.length).epsilon(1e-8));

    // closed-form length agrees with the adaptive quadrature
    CHECK(arc.length ==
          doctest::Approx(length_closed_form(arc.path, cs.h, cs.mu)).epsilon(1e-12));

    // r_min matches a dense sample of the path
    double rm = 1e300;
    for (int i = 0; i <= 4096; ++i)
      rm = std::min(rm, std::abs(arc.position(arc.path.T * i / 4096)));
    CHECK(arc.r_min == doctest::Approx(rm).epsilon(1e-6));
  }
}

TEST_CASE("solved arcs satisfy the structural invariants") {
  std::mt19937 rng(2718);
  std::uniform_real_distribution<double> ang(-pi, pi), rad(0.5, 2.0),
      hs(0.5, 3.0), ms(0.2, 3.0);
  int done = 0;
  while (done < 120) {
    const cplx p0 = std::polar(rad(rng), ang(rng));
    const cplx p1 = std::polar(rad(rng), ang(rng));
    const double gap = angle_gap(std::arg(p0), std::arg(p1));
    const double h = std::pow(10.0, hs(rng)), mu = ms(rng);

    ArcClass cls;
    const int pick = done % 4;
    if (pick < 2 && gap < pi - 0.2)
      cls = (pick == 0) ? ArcClass::Direct : ArcClass::Indirect;
    else if (pick >= 2 && gap > 0.2)
      cls = (pick == 2) ? ArcClass::CCW : ArcClass::CW;
    else
      continue;
    ++done;
    CAPTURE(done);

    const KeplerArc arc = solve_arc(p0, p1, cls, h, mu);
    const double scale = std::max(std::abs(p0), std::abs(p1));
    CHECK(std::abs(arc.setup.w0 * arc.setup.w0 - p0) < 1e-12 * scale);
    CHECK(std::abs(arc.setup.w1 * arc.setup.w1 - p1) < 1e-12 * scale);
    CHECK(std::abs(arc.position(0) - p0) < 1e-10 * scale);
    CHECK(std::abs(arc.position(arc.path.T) - p1) < 1e-10 * scale);

    // pointwise physical energy, 64 samples
    for (int i = 0; i <= 64; ++i) {
      const double tau = arc.path.T * i / 64;
      const cplx z = arc.position(tau), v = arc.velocity(tau);
      CHECK(std::abs(0.5 * sqnorm(v) - mu / std::abs(z) - h) < 1e-8 * h);
    }

    const double wind = winding(arc);
    if (cls == ArcClass::Direct) CHECK(std::abs(wind) < pi);
    if (cls == ArcClass::CCW) {
      CHECK(wind > 0);
      for (int i = 0; i <= 64; ++i) {
        const double tau = arc.path.T * i / 64;
        CHECK(cross(arc.position(tau), arc.velocity(tau)) > 0);
      }
    }
    if (cls == ArcClass::CW) CHECK(wind < 0);
  }
}

TEST_CASE("indirect arcs pinch onto the center as energy grows") {
  const cplx p0(1, 0), p1(0, 1);
  double prev = 1e300;
  for (double h : {1e2, 1e4, 1e6}) {
    const KeplerArc arc = solve_arc(p0, p1, ArcClass::Indirect, h, 1.0);
    CHECK(arc.r_min < prev);
    prev = arc.r_min;
  }
  CHECK(prev < 1e-5);

  const KeplerArc d = solve_arc(p0, p1, ArcClass::Direct, 100, 1.0);
  CHECK(d.r_min > 0.5);
  CHECK(d.length == doctest::Approx(10 * std::sqrt(2)).epsilon(0.01));
  const KeplerArc i = solve_arc(p0, p1, ArcClass::Indirect, 100, 1.0);
  CHECK(i.r_min < 0.1);
  CHECK(i.length > 19.0);
}

TEST_CASE("length asymptotics at high energy") {
  const cplx p0(1.1, -0.3), p1(-0.2, 0.9);

  // direct: L = sqrt(h) |p1-p0| + (mu/sqrt(h)) g_d with g_d stabilizing
  SUBCASE("direct remainder stabilizes") {
    const double mu = 1.0;
    double g4 = 0, g6 = 0;
    for (double h : {1e4, 1e6}) {
      const KeplerArc arc = solve_arc(p0, p1, ArcClass::Direct, h, mu);
      const double g = (arc.length - std::sqrt(h) * std::abs(p1 - p0)) *
                       std::sqrt(h) / mu;
      (h == 1e4 ? g4 : g6) = g;
    }
    CHECK(std::abs(g6 - g4) < 0.05 * std::abs(g4));
  }

  // potential-free limit
  SUBCASE("vanishing attraction recovers the chord") {
    const KeplerArc arc = solve_arc(p0, p1, ArcClass::Direct, 25.0, 1e-12);
    CHECK(arc.length ==
          doctest::Approx(5 * std::abs(p1 - p0)).epsilon(1e-6));
  }

  // indirect: the logarithmic correction carries coefficient mu/sqrt(h)
  SUBCASE("indirect log coefficient") {
    const cplx q0(1, 0), q1(0, 1);
    const double h = 1e6, mu = 1.0;
    const KeplerArc arc = solve_arc(q0, q1, ArcClass::Indirect, h, mu);
    const double ratio = (arc.length - 2 * std::sqrt(h)) /
                         ((mu / std::sqrt(h)) * std::log(2 * h / mu));
    CHECK(ratio > 0.8);
    CHECK(ratio < 1.2);
  }

  // rotational classes: sqrt(h)-scaled lengths approach f_a / f_c
  SUBCASE("ccw and cw leading terms") {
    const double h = 1e6, mu = 1.0;
    const double fa = (cross(p0, p1) >= 0) ? std::abs(p0 - p1)
                                           : std::abs(p0) + std::abs(p1);
    const double fc = (cross(p0, p1) >= 0) ? std::abs(p0) + std::abs(p1)
                                           : std::abs(p0 - p1);
    const KeplerArc za = solve_arc(p0, p1, ArcClass::CCW, h, mu);
    const KeplerArc zc = solve_arc(p0, p1, ArcClass::CW, h, mu);
    // remainders are O(1) after removing sqrt(h) f; the log term of the
    // through-center branch is o(sqrt(h)) as well
    CHECK(std::abs(za.length - std::sqrt(h) * fa) < 0.01 * std::sqrt(h));
    CHECK(std::abs(zc.length - std::sqrt(h) * fc) < 0.01 * std::sqrt(h));
  }
}

TEST_CASE("rotational classes coincide with direct or indirect off the seam") {
  const cplx p0 = std::polar(1.0, 2.4), p1 = std::polar(1.3, 2.4 + 0.9 * pi);
  REQUIRE(cross(p0, p1) > 0);
  const KeplerArc a = solve_arc(p0, p1, ArcClass::CCW, 40, 1);
  const KeplerArc d = solve_arc(p0, p1, ArcClass::Direct, 40, 1);
  CHECK(std::abs(a.setup.w1 - d.setup.w1) < 1e-14);
  CHECK(a.length == doctest::Approx(d.length).epsilon(1e-13));

  const KeplerArc c = solve_arc(p0, p1, ArcClass::CW, 40, 1);
  const KeplerArc i = solve_arc(p0, p1, ArcClass::Indirect, 40, 1);
  CHECK(std::abs(c.setup.w1 - i.setup.w1) < 1e-14);
  CHECK(c.length == doctest::Approx(i.length).epsilon(1e-13));
}

TEST_CASE("length gradients match finite differences and the regularized form") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> ang(-pi, pi), rad(0.6, 1.7),
      hs(0.3, 2.5);
  int done = 0;
  while (done < 60) {
    const cplx p0 = std::polar(rad(rng), ang(rng));
    const cplx p1 = std::polar(rad(rng), ang(rng));
    const double gap = angle_gap(std::arg(p0), std::arg(p1));
    if (gap > pi - 0.25 || std::abs(p0 - p1) < 0.2) continue;
    const double h = std::pow(10.0, hs(rng)), mu = 0.8;
    const ArcClass cls = (done % 2 == 0) ? ArcClass::Direct : ArcClass::Indirect;
    ++done;
    CAPTURE(done);

    const KeplerArc arc = solve_arc(p0, p1, cls, h, mu);
    const LengthGradient g = length_gradient(arc);

    const double step = 1e-5;
    auto L = [&](cplx a, cplx b) { return solve_arc(a, b, cls, h, mu).length; };
    const cplx fd0((L(p0 + step, p1) - L(p0 - step, p1)) / (2 * step),
                   (L(p0 + cplx(0, step), p1) - L(p0 - cplx(0, step), p1)) /
                       (2 * step));
    const cplx fd1((L(p0, p1 + step) - L(p0, p1 - step)) / (2 * step),
                   (L(p0, p1 + cplx(0, step)) - L(p0, p1 - cplx(0, step))) /
                       (2 * step));
    CHECK(std::abs(g.g0 - fd0) < 1e-5 * std::abs(g.g0));
    CHECK(std::abs(g.g1 - fd1) < 1e-5 * std::abs(g.g1));

    const cplx reg = length_gradient_regularized_p1(arc);
    CHECK(std::abs(g.g1 - reg) < 1e-9 * std::abs(reg));
  }
}

TEST_CASE("ccw gradient approaches the limit field at high energy") {
  // grad_{p1} f_a is unit(p1-p0) on the direct side of the seam and unit(p1)
  // on the indirect side
  const double h = 1e6, mu = 1.0;
  const cplx p0 = std::polar(1.0, 0.3);
  for (double dtheta : {0.5, 1.2, 2.2, 2.9, -0.8, -2.0, -3.0}) {
    const cplx p1 = std::polar(1.2, 0.3 + dtheta);
    const KeplerArc arc = solve_arc(p0, p1, ArcClass::CCW, h, mu);
    const cplx grad_fa =
        (cross(p0, p1) >= 0) ? unit(p1 - p0) : unit(p1);
    const cplx g1 = length_gradient(arc).g1;
    CHECK(std::abs(g1 / std::sqrt(h) - grad_fa) < 1e-2);
  }
}
