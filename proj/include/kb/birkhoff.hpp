#pragma once

#include <cstdint>
#include <vector>

#include "kb/parallel.hpp"
#include "kb/table.hpp"

namespace kb {

// Phase point of the classical billiard: boundary parameter and the angle
// alpha in (0,pi) between the outgoing direction and the oriented tangent.
struct PhaseState {
  double u;
  double alpha;
};

// A chord meeting the boundary orthogonally at both ends, together with the
// data entering the 2-periodic linearization. d1, d2 are measured from the
// scene center lying on the chord, so d = d1 + d2.
struct TwoPeriodicData {
  double u1, u2;
  double d;
  double k1, k2;
  double d1, d2;
};

struct OrthogonalChords {
  std::vector<TwoPeriodicData> chords;
  // set when every boundary point is distance-critical (circle about its own
  // center); chords then holds two representatives of the continuum
  bool degenerate_continuum = false;
};

struct Mat2 {
  double a, b, c, d;  // row-major [[a, b], [c, d]]
  double det() const { return a * d - b * c; }
  double trace() const { return a + d; }
};
inline Mat2 operator*(const Mat2& x, const Mat2& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
          x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

struct TwoPeriodicSquare {
  Mat2 m;            // differential of the squared map at (u1, pi/2)
  double trace;
  double discriminant;  // (trace/2)^2 - 1; factors as 4d(dk1-1)(dk2-1)(dk1k2-k1-k2)
  bool hyperbolic;
  double eig_lo = 0, eig_hi = 0;  // real eigenvalues when hyperbolic
};

// One step of the billiard map.
PhaseState bmap(const BoundaryTable& table, const PhaseState& s);

// All chords through c hitting the boundary orthogonally at both ends, found
// by pairing antipodally-aligned critical points of u -> |gamma(u) - c|.
OrthogonalChords orthogonal_chords_through(const BoundaryTable& table, cplx c);

// Differential of the billiard map at the 2-periodic point (u1, pi/2), in
// (arclength, angle) coordinates.
Mat2 dT_two_periodic(const TwoPeriodicData& data);

TwoPeriodicSquare dT2_two_periodic(const TwoPeriodicData& data);

// Invariant graph candidates delta_+/- of the focal construction; sign is +1
// or -1.
PhaseState delta_graph(const BoundaryTable& table, cplx c, double u, int sign);

struct OrbitRow {
  int32_t seed_id;
  int32_t step;
  double u;
  double alpha;
  bool valid;
};

struct OrbitTable {
  std::vector<OrbitRow> rows;  // (n+1) rows per seed, fixed layout
  int steps_per_seed = 0;
  int truncated_orbits = 0;  // orbits cut short by a tangency
};

OrbitTable iterate_portrait(const BoundaryTable& table,
                            const std::vector<PhaseState>& seeds, int n,
                            Exec exec = Exec::Serial);

}  // namespace kb
