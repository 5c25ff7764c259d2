#include "kb/generating.hpp"

#include <cmath>

namespace kb {

GeneratingValue generating_S(const BoundaryTable& table, cplx c, double xi,
                             double eta, ArcClass cls, double h, double mu,
                             double delta, double eps) {
  const cplx p0 = table.position(xi) - c;
  const cplx p1 = table.position(eta) - c;

  const double gap = angle_gap(std::arg(p0), std::arg(p1));

  if (delta > 0) {
    const double lo = delta, hi = 1 / delta;
    for (double r : {std::abs(p0), std::abs(p1)})
      if (r < lo || r > hi)
        throw OutsideAdmissibleSet("generating_S: endpoint radius outside [delta, 1/delta]");
    const bool rotational = cls == ArcClass::CCW || cls == ArcClass::CW;
    if (!rotational && gap > pi * (1 - delta))
      throw OutsideAdmissibleSet("generating_S: pair too close to antipodal for direct/indirect");
    if (rotational && gap < pi * (1 - delta))
      throw OutsideAdmissibleSet("generating_S: pair not antipodal enough for ccw/cw");
  }
  if (eps > 0 && cls == ArcClass::Direct) {
    const double sep = angle_gap(xi, eta);
    if (sep < eps)
      throw OutsideAdmissibleSet("generating_S: direct pair closer than eps");
  }

  // Within roundoff of antipodal the indirect branch sign is decided by
  // noise while the two mirror arcs tie in length; pin the ccw one so the
  // value stays deterministic across the seam.
  const bool near_seam = cls == ArcClass::Indirect && gap > pi - 1e-12;

  GeneratingValue out;
  if (near_seam) {
    out.arc = solve_arc(p0, p1, ArcClass::CCW, h, mu);
    out.seam = true;
  } else {
    try {
      out.arc = solve_arc(p0, p1, cls, h, mu);
    } catch (const AmbiguousBranch&) {
      if (cls != ArcClass::Indirect) throw;
      out.arc = solve_arc(p0, p1, ArcClass::CCW, h, mu);
      out.seam = true;
    }
  }
  out.S = out.arc.length;
  const LengthGradient g = length_gradient(out.arc);
  out.dS1 = dot(g.g0, table.velocity(xi));
  out.dS2 = dot(g.g1, table.velocity(eta));
  return out;
}

}  // namespace kb
