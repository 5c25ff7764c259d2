#pragma once

#include <string>
#include <vector>

#include "kb/focal.hpp"
#include "kb/generating.hpp"
#include "kb/kepler_billiard.hpp"
#include "kb/parallel.hpp"
#include "kb/table.hpp"

namespace kb {

// Periodic symbolic words over one of the two shadowing alphabets. Triangle
// words alternate the two vertices of a punctured Birkhoff triangle; the
// degenerate alphabet shadows the radial segments of an antipodal min/max
// pair, transferring through a near-antipodal chord.
struct SymbolWord {
  enum class Alphabet { Triangle, Degenerate };
  Alphabet alphabet = Alphabet::Triangle;
  std::vector<int> letters;  // triangle: 0 = T, 1 = T'; degenerate: 0 = m, 1 = M

  int period() const { return int(letters.size()); }
  int vars_per_block() const { return alphabet == Alphabet::Triangle ? 2 : 3; }
  int bounce_count() const { return period() * vars_per_block(); }
};

// "TT'T" -> triangle word, "mMM" -> degenerate word. Mixing alphabets or an
// empty string is an error.
SymbolWord parse_word(const std::string& text);
std::string to_string(const SymbolWord& word);

// Closed circular parameter interval, center +- radius.
struct IntervalSpec {
  double center = 0;
  double radius = 0;
  bool contains(double u, double slack = 0.0) const;
};

// The interval data every word domain is assembled from.
// Triangle alphabet: intervals = { I, I' } around the triangle vertices.
// Degenerate alphabet: intervals = { I_m, I_M, I_P, I_Q }.
struct WordDomain {
  SymbolWord::Alphabet alphabet = SymbolWord::Alphabet::Triangle;
  std::vector<IntervalSpec> intervals;
  double delta = 0;      // admissibility margin certified for all arc pairs
  double eps_chord = 0;  // lower bound on the direct-pair chord length
  // Rotational class of the transfer arc between the inflection intervals.
  // Selection picks the orientation whose branch of the perimeter function
  // keeps a non-zero index at the inflection pair; the other orientation has
  // no degree-forced critical point and the solver would search in vain.
  ArcClass transfer = ArcClass::CCW;
};

struct Selection {
  bool ok = false;
  std::string reason;  // set when !ok
  WordDomain domain;
};

// Build the interval template from the critical-point reports. Prefers the
// triangle alphabet (needs a non-zero-index critical pair that is not
// antipodal); falls back to the degenerate alphabet when only zero-area
// pairs exist and the distance function provides the antipodal min/max pair
// plus an antipodal inflection pair. A focal center of the second kind
// admits no construction at all. Interval radii start wide and are halved
// until every required pair of intervals is admissible with the given delta
// and the enclosed critical point is unique.
Selection select_intervals(const BoundaryTable& table, cplx c,
                           const PsiCriticalSet& cps, const KindReport& kind,
                           double delta = 0.1);

// Interval assigned to each variable of a word over a domain, in solve order:
// block i contributes (u_{i,1}, u_{i,2}[, u_{i,3}]).
std::vector<IntervalSpec> word_box(const SymbolWord& word, const WordDomain& domain);

struct WordEval {
  double value = 0;
  std::vector<double> grad;  // one entry per bounce parameter
};

// Total Jacobi length of the arc concatenation realizing the word: direct
// within each block and indirect across blocks for triangle words; indirect,
// transfer, indirect for degenerate ones, with the transfer orientation taken
// from the domain. The gradient couples each variable only to its two incident
// arcs, so entry k depends on blocks k-1, k, k+1 alone. Arc failures are
// rethrown with the offending block.
WordEval W_eval(const SymbolWord& word, const std::vector<double>& u,
                const BilliardScene& scene,
                double quad_rel_tol = 1e-12,
                ArcClass transfer = ArcClass::CCW);

struct SolveOptions {
  double h_threshold = 0;    // 0: use 1000 / table diameter
  int max_iterations = 120;
  int max_multistarts = 81;
  double grad_tol = 1e-9;    // infinity norm target for the gradient
  double fd_delta = 1e-5;    // step for the block Hessians
  unsigned rng_seed = 12;
};

struct RealizedOrbit {
  SymbolWord word;
  std::vector<double> u;        // bounce parameters, wrapped to [0, 2pi)
  std::vector<ArcClass> arcs;   // class of the arc leaving bounce j
  double value = 0;             // W at the solution
  double grad_inf = 0;
  int bounces = 0;
  int newton_iterations = 0;
  int multistarts_used = 0;
  bool converged = false;
  bool collapsed = false;       // solution repeats a shorter periodic word
  int collapse_factor = 1;
};

// Interior critical point of W over the word's box: damped Newton on the
// analytic gradient with the block Hessian assembled by finite differences,
// projected into the box, restarted from shifted corners on failure. A
// failure to converge is reported, not thrown; it never asserts that no
// orbit exists.
RealizedOrbit solve_word(const SymbolWord& word, const BilliardScene& scene,
                         const WordDomain& domain, const SolveOptions& opts = {});

// Convenience batch driver; words are independent, so they solve in parallel.
std::vector<RealizedOrbit> solve_words(const std::vector<SymbolWord>& words,
                                       const BilliardScene& scene,
                                       const WordDomain& domain,
                                       const SolveOptions& opts = {},
                                       Exec exec = Exec::Serial);

struct OrbitVerification {
  double max_junction = 0;      // largest elastic-reflection defect
  double value_jitter = 0;      // |W| change when quadrature tol shrinks 100x
  double containment = 0;       // largest excursion outside an assigned interval
  bool replay_ok = false;       // chained kmap replay reproduced the sequence
  double replay_residual = 0;   // worst circular mismatch of the chained replay
  double period_close = 0;      // mismatch after one full period
  double energy_drift = 0;      // worst relative energy residual in the replay
  double replay_cond = 1;       // error amplification over one period, roughly
                                // the product of (bounce radius / min_r) over
                                // the near-center arcs; residuals below
                                // replay_cond * 1e-14 are at the noise floor
  bool step_ok = false;         // every leg re-run individually lands on the
                                // next stored bounce to 1e-6
  double step_residual = 0;     // worst per-leg mismatch, parameters and
                                // departure velocities both; stays conditioned
                                // even when the orbit passes through the center
  double total_length = 0;      // W recomputed at the tighter tolerance
};

// Independent audit of a solved orbit: arcs rebuilt from scratch, reflection
// condition at every junction, containment in the word box, a full kmap
// replay chained from the first bounce, and a leg-by-leg replay restarted
// from every stored bounce. The chained replay is the stricter read but its
// error floor is the one-period conditioning times the storage precision of
// the bounce parameters; orbits threading the center overwhelm it, which is
// what the leg-by-leg audit and replay_cond are for.
OrbitVerification verify_orbit(const RealizedOrbit& orbit,
                               const BilliardScene& scene,
                               const WordDomain& domain,
                               double quad_rel_tol = 1e-12);

}  // namespace kb
