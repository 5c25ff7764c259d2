#include "kb/birkhoff.hpp"

#include <algorithm>
#include <cmath>

#include "kb/rootfind.hpp"

namespace kb {

PhaseState bmap(const BoundaryTable& table, const PhaseState& s) {
  const cplx t0 = table.unit_tangent(s.u);
  const cplx n0 = table.inward_normal(s.u);
  const cplx dir = std::cos(s.alpha) * t0 + std::sin(s.alpha) * n0;

  const RayHit hit = table.chord_exit(s.u, dir);
  const cplx t1 = table.unit_tangent(hit.u);
  const cplx n1 = table.inward_normal(hit.u);
  // elastic reflection about the tangent line at the impact
  const cplx out = dir - 2.0 * dot(dir, n1) * n1;
  return PhaseState{hit.u, std::atan2(dot(out, n1), dot(out, t1))};
}

OrthogonalChords orthogonal_chords_through(const BoundaryTable& table, cplx c) {
  if (!table.contains(c))
    throw GeometryError("orthogonal_chords_through: center outside the table");

  auto g = [&](double u) { return dot(table.position(u) - c, table.velocity(u)); };
  auto dg = [&](double u) {
    const cplx v = table.velocity(u);
    return sqnorm(v) + dot(table.position(u) - c, table.acceleration(u));
  };

  const int n = 2048;
  const double diam = table.diameter();

  OrthogonalChords out;

  std::vector<double> gv(n + 1);
  double gmax = 0;
  for (int i = 0; i <= n; ++i) {
    gv[i] = g(two_pi * i / n);
    gmax = std::max(gmax, std::abs(gv[i]));
  }

  std::vector<double> crit;
  if (gmax < 1e-10 * diam * diam) {
    // distance from c is constant: a circle about c, every diameter is an
    // orthogonal chord; report two representatives
    out.degenerate_continuum = true;
    crit = {0.0, table.radial_param(unit(table.position(0) - c) * cplx(0, 1)),
            table.radial_param(-unit(table.position(0) - c)),
            table.radial_param(unit(table.position(0) - c) * cplx(0, -1))};
  } else {
    for (int i = 0; i < n; ++i) {
      const double a = two_pi * i / n, b = two_pi * (i + 1) / n;
      if (gv[i] == 0) {
        crit.push_back(a);
        continue;
      }
      if ((gv[i] < 0) != (gv[i + 1] < 0))
        crit.push_back(polish_root(g, dg, a, b, gv[i], gv[i + 1], 1e-14));
    }
  }

  std::sort(crit.begin(), crit.end());
  std::vector<double> uniq;
  for (double u : crit) {
    if (!uniq.empty() && u - uniq.back() < 1e-8) continue;
    if (!uniq.empty() && (u - uniq.front()) > two_pi - 1e-8) continue;
    uniq.push_back(u);
  }
  crit.swap(uniq);

  auto make_chord = [&](double ua, double ub) {
    TwoPeriodicData tp;
    tp.u1 = ua;
    tp.u2 = ub;
    tp.d1 = std::abs(table.position(ua) - c);
    tp.d2 = std::abs(table.position(ub) - c);
    tp.d = std::abs(table.position(ua) - table.position(ub));
    tp.k1 = table.curvature(ua);
    tp.k2 = table.curvature(ub);
    return tp;
  };

  for (size_t i = 0; i < crit.size(); ++i) {
    for (size_t j = i + 1; j < crit.size(); ++j) {
      const cplx ei = unit(table.position(crit[i]) - c);
      const cplx ej = unit(table.position(crit[j]) - c);
      if (dot(ei, ej) < 0 && std::abs(cross(ei, ej)) < 1e-8) {
        out.chords.push_back(make_chord(crit[i], crit[j]));
        if (out.degenerate_continuum && out.chords.size() == 2) return out;
      }
    }
  }
  return out;
}

Mat2 dT_two_periodic(const TwoPeriodicData& t) {
  return {t.k1 * t.d - 1, t.d, t.k1 * t.k2 * t.d - (t.k1 + t.k2), t.k2 * t.d - 1};
}

TwoPeriodicSquare dT2_two_periodic(const TwoPeriodicData& t) {
  TwoPeriodicData swapped = t;
  std::swap(swapped.k1, swapped.k2);
  std::swap(swapped.u1, swapped.u2);
  std::swap(swapped.d1, swapped.d2);

  TwoPeriodicSquare r;
  r.m = dT_two_periodic(swapped) * dT_two_periodic(t);
  r.trace = r.m.trace();
  // quarter discriminant (trace/2)^2 - det; equals the factored product
  // 4d(dk1-1)(dk2-1)(dk1k2-k1-k2)
  r.discriminant = r.trace * r.trace / 4 - 1;
  r.hyperbolic = r.discriminant > 0;
  if (r.hyperbolic) {
    const double s = std::sqrt(r.discriminant);
    r.eig_lo = r.trace / 2 - s;
    r.eig_hi = r.trace / 2 + s;
  }
  return r;
}

PhaseState delta_graph(const BoundaryTable& table, cplx c, double u, int sign) {
  const cplx e = unit(table.position(u) - c);
  const double proj = clamp_unit(dot(e, table.unit_tangent(u)));
  return PhaseState{u, std::acos(sign >= 0 ? proj : -proj)};
}

OrbitTable iterate_portrait(const BoundaryTable& table,
                            const std::vector<PhaseState>& seeds, int n,
                            Exec exec) {
  OrbitTable out;
  out.steps_per_seed = n;
  out.rows.assign(seeds.size() * (n + 1),
                  OrbitRow{0, 0, 0.0, 0.0, false});

  std::vector<int> truncated(seeds.size(), 0);
  for_each_index(seeds.size(), exec, [&](size_t k) {
    const size_t base = k * (n + 1);
    PhaseState s = seeds[k];
    out.rows[base] = OrbitRow{int32_t(k), 0, wrap_2pi(s.u), s.alpha, true};
    for (int step = 1; step <= n; ++step) {
      try {
        s = bmap(table, s);
      } catch (const GeometryError&) {
        truncated[k] = 1;
        break;
      }
      out.rows[base + step] =
          OrbitRow{int32_t(k), step, wrap_2pi(s.u), s.alpha, true};
    }
  });
  for (int t : truncated) out.truncated_orbits += t;
  return out;
}

}  // namespace kb
