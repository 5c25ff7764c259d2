#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "kb/birkhoff.hpp"
#include "kb/parallel.hpp"
#include "kb/table.hpp"

namespace kb {

// Triangle perimeter seen from the attracting center c:
//   Psi(xi, eta) = |gamma(xi)-c| + |gamma(eta)-c| + |gamma(eta)-gamma(xi)|.
// Partials are taken with respect to arclength (unit tangent), so gradient
// entries are dimensionless sums of cosines. Diagonal input is rejected.
double psi(const BoundaryTable& table, cplx c, double xi, double eta);

// (d/ds1 Psi, d/ds2 Psi) packed as a plane vector.
cplx grad_psi(const BoundaryTable& table, cplx c, double xi, double eta);

// Parameter hit by the elastic reflection of the ray c -> gamma(xi).
double reflect_param(const BoundaryTable& table, cplx c, double xi);

// phi(xi) = Psi(xi, xi') with xi' the reflected parameter above.
double phi(const BoundaryTable& table, cplx c, double xi);

struct FocalVerdict {
  bool focal;
  bool inconclusive;  // relative variation in the dead band [tol, 1e-3)
  double variation;   // max - min of phi over the test grid
  double mean;
};

// Samples phi on a 1024-point grid; focal iff variation < tol * mean.
FocalVerdict is_focal(const BoundaryTable& table, cplx c, double tol = 1e-6);

enum class ExtremumType { StrictMin, StrictMax, Inflection };

struct DistanceCritical {
  double u;
  double value;   // |gamma(u) - c|
  double second;  // second derivative of the distance in u
  ExtremumType type;
};

enum class PointKind { First, Second };

// Classification of c by the critical points of u -> |gamma(u)-c|.
// `kind` pairs any two strict extrema (mixed min/max allowed); the
// stricter same-type reading is reported alongside, with a disagreement
// flag, since the definition can be read both ways.
struct KindReport {
  std::vector<DistanceCritical> criticals;
  std::vector<std::pair<int, int>> antipodal_pairs;  // indices into criticals
  PointKind kind;
  PointKind kind_same_type;
  bool readings_disagree;
  bool degenerate_continuum;  // distance constant (circle about c)
  bool focal;
  double phi_variation;
};

KindReport classify_kind(const BoundaryTable& table, cplx c);

struct CriticalPoint {
  double xi, eta;
  double grad_norm;  // |grad Psi| after polishing
  int index;         // winding of grad Psi; 0 on a focal ridge
  bool area_flag;    // triangle degenerate: endpoints antipodal through c
  double level;      // Psi value
};

struct PsiCriticalSet {
  std::vector<CriticalPoint> points;  // one representative per (xi,eta)~(eta,xi) class
  bool focal_ridge = false;           // phi constant: zeros form a curve, indices meaningless
  int unresolved_cells = 0;           // candidate cells where polishing failed
};

// Grid scan (128x128) plus Newton polish of grad Psi = 0 away from the
// diagonal. Cells that fail to converge are subdivided once, then counted.
PsiCriticalSet critical_points_psi(const BoundaryTable& table, cplx c,
                                   Exec exec = Exec::Parallel);

// Winding number of a plane field along a circle, sampled at 720 points.
// The radius is halved up to three times if the field comes within 1e-10
// of zero on the circle or the winding fails to land near an integer.
int winding_index(const std::function<cplx(cplx)>& field, cplx center, double radius);

struct BranchValue {
  double S;
  cplx grad;  // arclength partials, as in grad_psi
};

// Psi*(xi,eta) = |gamma(xi)-c| + |gamma(eta)-c|.
BranchValue psi_star(const BoundaryTable& table, cplx c, double xi, double eta);

// Branch selection by the sign of det(gamma(xi)-c, gamma(eta)-c):
//   Psi_a = Psi on det >= 0 and 2 Psi* on det < 0; Psi_c the other way.
// On the seam det = 0 the evaluation is one-sided (det >= 0 branch).
BranchValue psi_a(const BoundaryTable& table, cplx c, double xi, double eta);
BranchValue psi_c(const BoundaryTable& table, cplx c, double xi, double eta);

struct ChordHessian {
  Mat2 m;
  double det;
};

// Hessian of Psi at a two-periodic chord through c, in arclength units:
// [[1/d + 1/d1 - 2 k1, 1/d], [1/d, 1/d + 1/d2 - 2 k2]] with d = d1 + d2.
ChordHessian hess_det_chord(double d1, double d2, double k1, double k2);

struct FocalPolynomial {
  double c0, c1, c2;          // P(t) = c0 + c1 t + c2 t^2
  double delta;               // (d k2 - 1)(d k1 k2 - k1 - k2)
  std::vector<double> roots;  // real roots in (0, d), ascending
};

// P(t) = 1 - 2 k1 t + ((k1 + k2 - 2 d k1 k2) / (d (1 - d k2))) t^2, whose
// roots in (0, d) locate the Hessian-degenerate points on the chord.
// Rejects d k2 = 1 where the leading coefficient is singular.
FocalPolynomial focal_polynomial(double d, double k1, double k2);

}  // namespace kb
