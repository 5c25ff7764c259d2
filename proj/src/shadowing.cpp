#include "kb/shadowing.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

namespace kb {

namespace {

// class of the arc leaving bounce j: triangle words alternate direct and
// indirect, degenerate blocks run indirect, transfer, indirect where the
// transfer orientation comes from the selected domain
ArcClass arc_class_at(const SymbolWord& w, int j, ArcClass transfer) {
  if (w.alphabet == SymbolWord::Alphabet::Triangle)
    return (j % 2 == 0) ? ArcClass::Direct : ArcClass::Indirect;
  return (j % 3 == 1) ? transfer : ArcClass::Indirect;
}

double dir_of(const BoundaryTable& t, cplx c, double u) {
  return std::arg(t.position(u) - c);
}

// extreme direction gaps over two intervals, probed on a coarse grid; the
// direction is monotone in the parameter, so endpoints dominate
double max_dir_gap(const BoundaryTable& t, cplx c, const IntervalSpec& A,
                   const IntervalSpec& B) {
  double m = 0;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j)
      m = std::max(m, angle_gap(dir_of(t, c, A.center + 0.5 * i * A.radius),
                                dir_of(t, c, B.center + 0.5 * j * B.radius)));
  return m;
}

double min_dir_gap(const BoundaryTable& t, cplx c, const IntervalSpec& A,
                   const IntervalSpec& B) {
  double m = pi;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j)
      m = std::min(m, angle_gap(dir_of(t, c, A.center + 0.5 * i * A.radius),
                                dir_of(t, c, B.center + 0.5 * j * B.radius)));
  return m;
}

bool radii_in_bounds(const BoundaryTable& t, cplx c, const IntervalSpec& I,
                     double delta) {
  for (int i = 0; i <= 32; ++i) {
    const double u = I.center + (2.0 * i / 32.0 - 1.0) * I.radius;
    const double r = std::abs(t.position(u) - c);
    if (r < delta || r > 1.0 / delta) return false;
  }
  return true;
}

double min_chord(const BoundaryTable& t, const IntervalSpec& A,
                 const IntervalSpec& B) {
  double m = std::numeric_limits<double>::max();
  for (int i = 0; i <= 16; ++i)
    for (int j = 0; j <= 16; ++j) {
      const double a = A.center + (2.0 * i / 16.0 - 1.0) * A.radius;
      const double b = B.center + (2.0 * j / 16.0 - 1.0) * B.radius;
      m = std::min(m, std::abs(t.position(a) - t.position(b)));
    }
  return m;
}

bool triangle_from(const BoundaryTable& t, cplx c, const PsiCriticalSet& cps,
                   const CriticalPoint& pick, double delta, WordDomain& out) {
  // a candidate whose directions already sit inside the antipodal margin can
  // never be fixed by shrinking
  if (angle_gap(dir_of(t, c, pick.xi), dir_of(t, c, pick.eta)) >
      pi * (1 - delta))
    return false;
  const double d_par = angle_gap(pick.xi, pick.eta);
  double r = std::min(0.35, 0.4 * d_par);
  for (int iter = 0; iter < 40; ++iter, r *= 0.5) {
    const IntervalSpec I{wrap_2pi(pick.xi), r};
    const IntervalSpec Ip{wrap_2pi(pick.eta), r};
    if (2 * r >= d_par - 1e-9) continue;
    if (!radii_in_bounds(t, c, I, delta) || !radii_in_bounds(t, c, Ip, delta))
      continue;
    // indirect arcs may connect any pair drawn from I and I', so every
    // combination has to clear the antipodal margin
    const double g = std::max({max_dir_gap(t, c, I, Ip), max_dir_gap(t, c, I, I),
                               max_dir_gap(t, c, Ip, Ip)});
    if (g > pi * (1 - delta)) continue;
    bool unique = true;
    for (const auto& q : cps.points) {
      if (&q == &pick) continue;
      if ((I.contains(q.xi) && Ip.contains(q.eta)) ||
          (I.contains(q.eta) && Ip.contains(q.xi))) {
        unique = false;
        break;
      }
    }
    if (!unique) continue;
    out.alphabet = SymbolWord::Alphabet::Triangle;
    out.intervals = {I, Ip};
    out.delta = delta;
    out.eps_chord = 0.9 * min_chord(t, I, Ip);
    return true;
  }
  return false;
}

bool try_triangle(const BoundaryTable& t, cplx c, const PsiCriticalSet& cps,
                  double delta, WordDomain& out, std::string& why) {
  bool any = false;
  for (const auto& p : cps.points) {
    if (p.index == 0 || p.area_flag) continue;
    any = true;
    if (triangle_from(t, c, cps, p, delta, out)) return true;
  }
  why = any ? "no candidate pair admits disjoint intervals within the margin"
            : "no non-antipodal critical pair with non-zero index";
  return false;
}

bool try_degenerate(const BoundaryTable& t, cplx c, const KindReport& kind,
                    double delta, WordDomain& out, std::string& why) {
  std::vector<const DistanceCritical*> mins, maxs, infl;
  for (const auto& d : kind.criticals) {
    if (d.type == ExtremumType::StrictMin)
      mins.push_back(&d);
    else if (d.type == ExtremumType::StrictMax)
      maxs.push_back(&d);
    else
      infl.push_back(&d);
  }
  if (mins.size() != 1 || maxs.size() != 1) {
    why = "distance extrema are not a unique min/max pair";
    return false;
  }
  auto antipodal = [&](double a, double b) {
    return std::abs(unit(t.position(a) - c) + unit(t.position(b) - c)) < 1e-6;
  };
  if (!antipodal(mins[0]->u, maxs[0]->u)) {
    why = "min and max directions are not antipodal";
    return false;
  }
  const DistanceCritical* P = nullptr;
  const DistanceCritical* Q = nullptr;
  for (size_t i = 0; i < infl.size() && !P; ++i)
    for (size_t j = i + 1; j < infl.size(); ++j)
      if (antipodal(infl[i]->u, infl[j]->u)) {
        P = infl[i];
        Q = infl[j];
        break;
      }
  if (!P) {
    why = "no antipodal inflection pair";
    return false;
  }

  // The perimeter function splits into a clockwise and an anticlockwise
  // branch at the pair; only a branch with non-zero index forces a critical
  // point of the assembled length, so the transfer arc takes its orientation.
  auto branch_index = [&](bool ccw) {
    auto field = [&](cplx q) {
      const BranchValue b = ccw ? psi_a(t, c, q.real(), q.imag())
                                : psi_c(t, c, q.real(), q.imag());
      return b.grad;
    };
    for (double rr : {0.05, 0.02, 0.1}) {
      try {
        return winding_index(field, cplx(P->u, Q->u), rr);
      } catch (const GeometryError&) {
      }
    }
    return 0;
  };
  ArcClass transfer;
  if (branch_index(true) != 0)
    transfer = ArcClass::CCW;
  else if (branch_index(false) != 0)
    transfer = ArcClass::CW;
  else {
    why = "inflection pair has zero index on both rotational branches";
    return false;
  }

  const double centers[4] = {mins[0]->u, maxs[0]->u, P->u, Q->u};
  double r = 0.3;
  for (int iter = 0; iter < 40; ++iter, r *= 0.5) {
    IntervalSpec iv[4];
    for (int k = 0; k < 4; ++k) iv[k] = {wrap_2pi(centers[k]), r};
    bool ok = true;
    for (int a = 0; a < 4 && ok; ++a)
      for (int b = a + 1; b < 4 && ok; ++b)
        if (angle_gap(iv[a].center, iv[b].center) <= 2 * r + 1e-9) ok = false;
    for (int k = 0; k < 4 && ok; ++k)
      if (!radii_in_bounds(t, c, iv[k], delta)) ok = false;
    if (ok) {
      // indirect legs: m/M to P and Q to m/M must stay clear of antipodal
      const double g = std::max({max_dir_gap(t, c, iv[0], iv[2]),
                                 max_dir_gap(t, c, iv[1], iv[2]),
                                 max_dir_gap(t, c, iv[3], iv[0]),
                                 max_dir_gap(t, c, iv[3], iv[1])});
      // transfer chord P-Q must stay inside the antipodal band
      const double band = min_dir_gap(t, c, iv[2], iv[3]);
      if (g <= pi * (1 - delta) && band >= pi * (1 - delta)) {
        out.alphabet = SymbolWord::Alphabet::Degenerate;
        out.intervals = {iv[0], iv[1], iv[2], iv[3]};
        out.delta = delta;
        out.eps_chord = 0;
        out.transfer = transfer;
        return true;
      }
    }
  }
  why = "no admissible interval radius for the degenerate template";
  return false;
}

}  // namespace

SymbolWord parse_word(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("parse_word: empty word");
  SymbolWord w;
  bool tri = false, deg = false;
  for (size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == 'T') {
      tri = true;
      if (i + 1 < text.size() && text[i + 1] == '\'') {
        w.letters.push_back(1);
        ++i;
      } else {
        w.letters.push_back(0);
      }
    } else if (ch == 'm') {
      deg = true;
      w.letters.push_back(0);
    } else if (ch == 'M') {
      deg = true;
      w.letters.push_back(1);
    } else {
      throw std::invalid_argument(std::string("parse_word: unexpected character '") +
                                  ch + "'");
    }
  }
  if (tri && deg) throw std::invalid_argument("parse_word: mixed alphabets");
  w.alphabet = deg ? SymbolWord::Alphabet::Degenerate : SymbolWord::Alphabet::Triangle;
  return w;
}

std::string to_string(const SymbolWord& word) {
  std::string s;
  for (int l : word.letters) {
    if (word.alphabet == SymbolWord::Alphabet::Triangle)
      s += (l == 0) ? "T" : "T'";
    else
      s += (l == 0) ? "m" : "M";
  }
  return s;
}

bool IntervalSpec::contains(double u, double slack) const {
  return angle_gap(u, center) <= radius + slack;
}

Selection select_intervals(const BoundaryTable& table, cplx c,
                           const PsiCriticalSet& cps, const KindReport& kind,
                           double delta) {
  Selection sel;
  if (kind.focal && kind.kind == PointKind::Second) {
    sel.reason = "focal point of the second kind: no shadowing construction applies";
    return sel;
  }
  if (kind.degenerate_continuum) {
    sel.reason = "every boundary point is distance-critical; no isolated template";
    return sel;
  }
  std::string why_tri, why_deg;
  if (try_triangle(table, c, cps, delta, sel.domain, why_tri)) {
    sel.ok = true;
    return sel;
  }
  if (try_degenerate(table, c, kind, delta, sel.domain, why_deg)) {
    sel.ok = true;
    return sel;
  }
  sel.reason = "triangle template: " + why_tri + "; degenerate template: " + why_deg;
  return sel;
}

std::vector<IntervalSpec> word_box(const SymbolWord& word, const WordDomain& domain) {
  if (word.alphabet != domain.alphabet)
    throw std::invalid_argument("word_box: word and domain use different alphabets");
  std::vector<IntervalSpec> box;
  box.reserve(word.bounce_count());
  for (int letter : word.letters) {
    if (word.alphabet == SymbolWord::Alphabet::Triangle) {
      box.push_back(domain.intervals[letter == 0 ? 0 : 1]);
      box.push_back(domain.intervals[letter == 0 ? 1 : 0]);
    } else {
      box.push_back(domain.intervals[letter == 0 ? 0 : 1]);
      box.push_back(domain.intervals[2]);
      box.push_back(domain.intervals[3]);
    }
  }
  return box;
}

WordEval W_eval(const SymbolWord& word, const std::vector<double>& u,
                const BilliardScene& scene, double quad_rel_tol,
                ArcClass transfer) {
  const int n = word.bounce_count();
  if (int(u.size()) != n)
    throw std::invalid_argument("W_eval: variable count does not match the word");
  WordEval out;
  out.grad.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const int next = (j + 1) % n;
    const ArcClass cls = arc_class_at(word, j, transfer);
    GeneratingValue gv;
    try {
      gv = generating_S(scene.table, scene.center, u[j], u[next], cls, scene.h,
                        scene.mu);
    } catch (const ArcError& e) {
      std::ostringstream msg;
      msg << "block " << j / word.vars_per_block() << ", " << to_string(cls)
          << " arc (" << j << " -> " << next << "): " << e.what();
      throw ArcError(msg.str());
    }
    double S = gv.S;
    if (quad_rel_tol != 1e-12)
      S = jacobi_length(gv.arc.path, scene.h, scene.mu, quad_rel_tol);
    out.value += S;
    out.grad[j] += gv.dS1;
    out.grad[next] += gv.dS2;
  }
  return out;
}

RealizedOrbit solve_word(const SymbolWord& word, const BilliardScene& scene,
                         const WordDomain& domain, const SolveOptions& opts) {
  if (word.period() == 0) throw std::invalid_argument("solve_word: empty word");
  if (word.period() > 64) throw std::invalid_argument("solve_word: word longer than 64");
  const double thr =
      opts.h_threshold > 0 ? opts.h_threshold : 1000.0 / scene.table.diameter();
  if (scene.h < thr) {
    std::ostringstream msg;
    msg << "solve_word: h = " << scene.h << " below the working threshold " << thr;
    throw std::invalid_argument(msg.str());
  }
  const auto box = word_box(word, domain);
  const int n = word.bounce_count();

  RealizedOrbit orbit;
  orbit.word = word;
  orbit.bounces = n;
  orbit.u.assign(n, 0.0);
  orbit.grad_inf = std::numeric_limits<double>::max();

  auto grad_at = [&](const Eigen::VectorXd& x) -> std::optional<Eigen::VectorXd> {
    std::vector<double> u(x.data(), x.data() + n);
    try {
      const WordEval we = W_eval(word, u, scene, 1e-12, domain.transfer);
      Eigen::VectorXd g(n);
      for (int k = 0; k < n; ++k) g[k] = we.grad[k];
      return g;
    } catch (const ArcError&) {
      return std::nullopt;
    }
  };

  // block Hessian by finite differences; each arc only couples its two
  // endpoint variables, so four solver calls per arc fill the matrix
  auto hessian_at = [&](const Eigen::VectorXd& x) -> std::optional<Eigen::MatrixXd> {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    const double d = opts.fd_delta;
    for (int j = 0; j < n; ++j) {
      const int next = (j + 1) % n;
      const ArcClass cls = arc_class_at(word, j, domain.transfer);
      try {
        const auto gp = generating_S(scene.table, scene.center, x[j] + d, x[next],
                                     cls, scene.h, scene.mu);
        const auto gm = generating_S(scene.table, scene.center, x[j] - d, x[next],
                                     cls, scene.h, scene.mu);
        const auto hp = generating_S(scene.table, scene.center, x[j], x[next] + d,
                                     cls, scene.h, scene.mu);
        const auto hm = generating_S(scene.table, scene.center, x[j], x[next] - d,
                                     cls, scene.h, scene.mu);
        H(j, j) += (gp.dS1 - gm.dS1) / (2 * d);
        H(next, j) += (gp.dS2 - gm.dS2) / (2 * d);
        H(j, next) += (hp.dS1 - hm.dS1) / (2 * d);
        H(next, next) += (hp.dS2 - hm.dS2) / (2 * d);
      } catch (const ArcError&) {
        return std::nullopt;
      }
    }
    return H;
  };

  auto project = [&](Eigen::VectorXd& x) {
    for (int k = 0; k < n; ++k)
      x[k] = std::clamp(x[k], box[k].center - box[k].radius,
                        box[k].center + box[k].radius);
  };

  std::mt19937 rng(opts.rng_seed);
  std::uniform_real_distribution<double> shift(-0.6, 0.6);

  for (int start = 0; start <= opts.max_multistarts && !orbit.converged; ++start) {
    Eigen::VectorXd x(n);
    for (int k = 0; k < n; ++k)
      x[k] = box[k].center + (start == 0 ? 0.0 : shift(rng) * box[k].radius);
    if (start > 0) ++orbit.multistarts_used;

    auto g_opt = grad_at(x);
    if (!g_opt) continue;
    Eigen::VectorXd g = *g_opt;
    double gn = g.lpNorm<Eigen::Infinity>();

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
      ++orbit.newton_iterations;
      if (gn <= opts.grad_tol) break;
      auto H_opt = hessian_at(x);
      if (!H_opt) break;
      Eigen::VectorXd dx = H_opt->fullPivLu().solve(-g);
      if (!dx.allFinite()) break;
      // keep steps inside the scale of the box
      double cap = 0;
      for (int k = 0; k < n; ++k) cap = std::max(cap, box[k].radius);
      const double dn = dx.lpNorm<Eigen::Infinity>();
      if (dn > cap) dx *= cap / dn;

      bool advanced = false;
      for (double lambda = 1.0; lambda >= 1.0 / 128; lambda *= 0.5) {
        Eigen::VectorXd xt = x + lambda * dx;
        project(xt);
        auto gt = grad_at(xt);
        if (!gt) continue;
        const double gtn = gt->lpNorm<Eigen::Infinity>();
        if (gtn < gn * (1.0 - 0.25 * lambda)) {
          x = xt;
          g = *gt;
          gn = gtn;
          advanced = true;
          break;
        }
      }
      if (!advanced) break;
    }

    // polish well below grad_tol: a kmap replay through near-center arcs
    // amplifies errors in u by the replay conditioning, so the parameters
    // must be sharper than the acceptance threshold itself requires
    if (gn <= opts.grad_tol) {
      for (int p = 0; p < 8 && gn > 1e-13; ++p) {
        auto H_opt = hessian_at(x);
        if (!H_opt) break;
        Eigen::VectorXd dx = H_opt->fullPivLu().solve(-g);
        if (!dx.allFinite()) break;
        Eigen::VectorXd xt = x + dx;
        project(xt);
        auto gt = grad_at(xt);
        if (!gt) break;
        const double gtn = gt->lpNorm<Eigen::Infinity>();
        if (gtn >= gn) break;
        x = xt;
        g = *gt;
        gn = gtn;
      }
    }

    if (gn < orbit.grad_inf) {
      orbit.grad_inf = gn;
      for (int k = 0; k < n; ++k) orbit.u[k] = wrap_2pi(x[k]);
    }
    if (gn <= opts.grad_tol) orbit.converged = true;
  }

  orbit.arcs.resize(n);
  for (int j = 0; j < n; ++j) orbit.arcs[j] = arc_class_at(word, j, domain.transfer);
  if (orbit.converged) {
    std::vector<double> u(orbit.u.begin(), orbit.u.end());
    orbit.value = W_eval(word, u, scene, 1e-12, domain.transfer).value;
  }

  // a word that repeats a shorter modulus may solve to the shorter orbit
  // traversed several times; detect and report the collapse
  const int N = word.period(), m = word.vars_per_block();
  for (int d = 1; d < N && orbit.converged; ++d) {
    if (N % d) continue;
    bool letters_periodic = true;
    for (int i = 0; i < N; ++i)
      if (word.letters[i] != word.letters[i % d]) {
        letters_periodic = false;
        break;
      }
    if (!letters_periodic) continue;
    bool u_periodic = true;
    for (int k = 0; k < n; ++k)
      if (angle_gap(orbit.u[k], orbit.u[(k + d * m) % n]) > 1e-6) {
        u_periodic = false;
        break;
      }
    if (u_periodic) {
      orbit.collapsed = true;
      orbit.collapse_factor = N / d;
      break;
    }
  }
  return orbit;
}

std::vector<RealizedOrbit> solve_words(const std::vector<SymbolWord>& words,
                                       const BilliardScene& scene,
                                       const WordDomain& domain,
                                       const SolveOptions& opts, Exec exec) {
  for (const auto& w : words)
    if (w.alphabet != domain.alphabet)
      throw std::invalid_argument("solve_words: word alphabet does not match domain");
  std::vector<RealizedOrbit> out(words.size());
  for_each_index(words.size(), exec, [&](size_t i) {
    try {
      out[i] = solve_word(words[i], scene, domain, opts);
    } catch (const std::exception&) {
      out[i].word = words[i];
      out[i].converged = false;
    }
  });
  return out;
}

OrbitVerification verify_orbit(const RealizedOrbit& orbit,
                               const BilliardScene& scene,
                               const WordDomain& domain, double quad_rel_tol) {
  OrbitVerification rep;
  const auto box = word_box(orbit.word, domain);
  const int n = orbit.bounces;

  const WordEval tight =
      W_eval(orbit.word, orbit.u, scene, quad_rel_tol, domain.transfer);
  const WordEval loose =
      W_eval(orbit.word, orbit.u, scene, quad_rel_tol * 100, domain.transfer);
  rep.total_length = tight.value;
  rep.value_jitter = std::abs(tight.value - loose.value);
  for (double g : tight.grad) rep.max_junction = std::max(rep.max_junction, std::abs(g));
  for (int k = 0; k < n; ++k)
    rep.containment = std::max(
        rep.containment, angle_gap(orbit.u[k], box[k].center) - box[k].radius);
  rep.containment = std::max(rep.containment, 0.0);

  try {
    std::vector<cplx> depart(n);
    for (int j = 0; j < n; ++j)
      depart[j] = generating_S(scene.table, scene.center, orbit.u[j],
                               orbit.u[(j + 1) % n], orbit.arcs[j], scene.h,
                               scene.mu)
                      .arc.v0;

    BilliardState st{orbit.u[0], depart[0]};
    rep.replay_ok = true;
    for (int j = 1; j <= n; ++j) {
      const ArrivalInfo ai = propagate(scene, st);
      const double r0 = std::abs(scene.table.position(st.u) - scene.center);
      const double r1 = std::abs(scene.table.position(ai.u) - scene.center);
      rep.replay_cond *=
          std::max(1.0, (r0 + r1) / std::max(ai.min_r, 1e-300));
      st = kmap(scene, st);
      const double miss = angle_gap(st.u, orbit.u[j % n]);
      rep.replay_residual = std::max(rep.replay_residual, miss);
      rep.energy_drift =
          std::max(rep.energy_drift, energy_residual(scene, st));
      if (j == n)
        rep.period_close = miss + std::abs(st.v - depart[0]) / std::abs(depart[0]);
    }
    rep.replay_ok = rep.replay_residual < 1e-6 && rep.period_close < 1e-6;

    // leg-by-leg: one kmap from each stored bounce must land on the next one
    // and reproduce its departure velocity
    for (int j = 0; j < n; ++j) {
      const int next = (j + 1) % n;
      const BilliardState out = kmap(scene, BilliardState{orbit.u[j], depart[j]});
      const double mu = angle_gap(out.u, orbit.u[next]);
      const double mv = std::abs(out.v - depart[next]) / std::abs(depart[next]);
      rep.step_residual = std::max(rep.step_residual, std::max(mu, mv));
    }
    rep.step_ok = rep.step_residual < 1e-6;
  } catch (const std::exception&) {
    rep.replay_ok = false;
    rep.step_ok = false;
  }
  return rep;
}

}  // namespace kb
