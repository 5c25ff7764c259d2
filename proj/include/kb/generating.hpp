#pragma once

#include "kb/kepler_arc.hpp"
#include "kb/table.hpp"

namespace kb {

struct OutsideAdmissibleSet : ArcError {
  using ArcError::ArcError;
};

struct GeneratingValue {
  double S;         // Jacobi length of the connecting arc
  double dS1, dS2;  // partial derivatives in the table parameters
  KeplerArc arc;
  bool seam = false;  // antipodal indirect pair resolved through the ccw lift
};

// Generating function of the Kepler billiard: S = L(arc between gamma(xi) and
// gamma(eta), center-relative), with partials taken w.r.t. the table's own
// parameter (chain rule through the raw tangent gamma'). delta > 0 restricts
// to the admissible sets: direct/indirect need an angular gap at most
// pi(1-delta) seen from c, ccw/cw a gap at least pi(1-delta), and all radii
// within [delta, 1/delta]; eps > 0 additionally separates direct pairs.
// An indirect pair within 1e-12 of antipodal has two mirror arcs of equal
// length and a noise-decided branch sign; the value is taken on the ccw one
// and flagged via `seam`.
GeneratingValue generating_S(const BoundaryTable& table, cplx c, double xi,
                             double eta, ArcClass cls, double h, double mu,
                             double delta = 0.0, double eps = 0.0);

}  // namespace kb
