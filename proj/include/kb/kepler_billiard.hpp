#pragma once

#include <cstdint>
#include <vector>

#include "kb/birkhoff.hpp"
#include "kb/parallel.hpp"
#include "kb/table.hpp"

namespace kb {

// A convex table with an attracting center inside it. mu is the strength of
// the -mu/r potential, h > 0 the fixed energy of every trajectory.
struct BilliardScene {
  const BoundaryTable& table;
  cplx center;
  double mu;
  double h;
};

// Outgoing phase point: boundary parameter plus the full velocity vector.
// Consistent states satisfy |v|^2/2 - mu/|gamma(u) - c| = h and point inward.
struct BilliardState {
  double u;
  cplx v;
};

struct ArrivalInfo {
  double u = 0;            // impact parameter
  cplx v;                  // arrival velocity, before reflection
  double transit_time = 0;
  double min_r = 0;        // closest approach to the center along the arc
  bool collision = false;  // zero angular momentum, continued through c
  bool grazing = false;    // tangential impact, |sin alpha| < 1e-6
  double residual = 0;     // distance from the polished impact to the curve
};

// Follow the Kepler flow from an outgoing state to the next boundary
// crossing. The motion is integrated in Levi-Civita time, where the flow is
// the closed-form w(tau) = w0 cosh(tau) + w0' sinh(tau); the crossing is
// bracketed on a curvature-bounded tau grid and polished by bisection on the
// signed boundary offset. Radial shots pass through the center and come back
// out along the same ray, so they return to their launch point.
ArrivalInfo propagate(const BilliardScene& scene, const BilliardState& s);

// One step of the Kepler billiard map: propagate, then reflect the arrival
// velocity about the tangent. Throws GeometryError on a grazing impact.
BilliardState kmap(const BilliardScene& scene, const BilliardState& s);

// State with energy h leaving gamma(u) at angle alpha in (0, pi) to the
// oriented tangent.
BilliardState launch_state(const BilliardScene& scene, double u, double alpha);

// Angle of v against the tangent at u, in (0, pi) for inward vectors.
double launch_angle(const BoundaryTable& table, double u, cplx v);

// |  |v|^2/2 - mu/r - h | / h.
double energy_residual(const BilliardScene& scene, const BilliardState& s);

// Sufficient condition for the first-return map to be defined everywhere:
// the tightest Keplerian turn, bounded by mu/(2 h r^2) at distance r >=
// r_guard from the center, must be flatter than the flattest boundary turn.
// r_guard is half the distance from the center to the boundary. A negative
// margin flags the scene but does not stop the integrator.
struct WellDefined {
  bool ok = false;
  double r_guard = 0;
  double margin = 0;
};
WellDefined well_defined_check(const BilliardScene& scene);

struct KeplerOrbitRow {
  int32_t seed_id;
  int32_t step;
  double u;
  double alpha;            // outgoing angle to the tangent
  double energy_residual;  // relative
  double min_r;            // along the incoming arc; launch radius at step 0
  bool valid;
};

struct KeplerOrbitTable {
  std::vector<KeplerOrbitRow> rows;  // (n+1) rows per seed, fixed layout
  int steps_per_seed = 0;
  int truncated_orbits = 0;  // orbits cut short by grazing or a solver error
};

// n steps of kmap from each seed. Rows land in fixed slots
// rows[k*(n+1) + step], so the output is identical under both executors.
KeplerOrbitTable portrait(const BilliardScene& scene,
                          const std::vector<PhaseState>& seeds, int n,
                          Exec exec = Exec::Serial);

}  // namespace kb
