#include "kb/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kb/focal.hpp"
#include "kb/generating.hpp"
#include "kb/io.hpp"
#include "kb/kepler_arc.hpp"
#include "kb/kepler_billiard.hpp"
#include "kb/shadowing.hpp"
#include "kb/table.hpp"

namespace kb {

namespace {

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_num(const std::string& key, const std::string& text) {
  try {
    size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (trim(text.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument(key + ": expected a number, got '" + text + "'");
}

int parse_int(const std::string& key, const std::string& text) {
  try {
    size_t pos = 0;
    const int v = std::stoi(text, &pos);
    if (trim(text.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument(key + ": expected an integer, got '" + text + "'");
}

cplx parse_pair(const std::string& key, const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw std::invalid_argument(key + ": expected X,Y, got '" + text + "'");
  return {parse_num(key, text.substr(0, comma)),
          parse_num(key, text.substr(comma + 1))};
}

ArcClass parse_arc_class(const std::string& key, const std::string& text) {
  if (text == "direct") return ArcClass::Direct;
  if (text == "indirect") return ArcClass::Indirect;
  if (text == "ccw") return ArcClass::CCW;
  if (text == "cw") return ArcClass::CW;
  throw std::invalid_argument(key + ": expected direct|indirect|ccw|cw, got '" +
                              text + "'");
}

void apply_config_line(RunConfig& cfg, const std::string& key,
                       const std::string& value) {
  if (key == "command") cfg.command = value;
  else if (key == "table") cfg.table_spec = value;
  else if (key == "center") cfg.center = parse_pair(key, value);
  else if (key == "mu") cfg.mu = parse_num(key, value);
  else if (key == "h") cfg.h = parse_num(key, value);
  else if (key == "seeds") cfg.seeds = parse_int(key, value);
  else if (key == "bounces") cfg.bounces = parse_int(key, value);
  else if (key == "samples") cfg.samples = parse_int(key, value);
  else if (key == "word") cfg.word = value;
  else if (key == "p0") cfg.p0 = parse_pair(key, value);
  else if (key == "p1") cfg.p1 = parse_pair(key, value);
  else if (key == "class") cfg.arc_class = value;
  else if (key == "csv") cfg.csv_path = value;
  else if (key == "svg") cfg.svg_path = value;
  else if (key == "tol-quad") cfg.tol_quad = parse_num(key, value);
  else if (key == "tol-grad") cfg.tol_grad = parse_num(key, value);
  else if (key == "tol-focal") cfg.tol_focal = parse_num(key, value);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

void read_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("config: cannot read '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not key = value");
    apply_config_line(cfg, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
}

// Split "kind:k=v,k=v,..." where a token without '=' continues the previous
// value, so complex coefficients and point pairs keep their inner commas.
struct TableSpec {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> kv;
};

TableSpec split_table_spec(const std::string& spec) {
  TableSpec out;
  const auto colon = spec.find(':');
  out.kind = spec.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  size_t start = 0;
  while (start <= rest.size() && !rest.empty()) {
    auto comma = rest.find(',', start);
    if (comma == std::string::npos) comma = rest.size();
    const std::string tok = trim(rest.substr(start, comma - start));
    start = comma + 1;
    if (tok.empty()) continue;
    const auto eq = tok.find('=');
    if (eq == std::string::npos) {
      if (out.kv.empty())
        throw std::invalid_argument("table: stray value '" + tok + "' in '" +
                                    spec + "'");
      out.kv.back().second += "," + tok;
    } else {
      out.kv.emplace_back(trim(tok.substr(0, eq)), trim(tok.substr(eq + 1)));
    }
    if (comma == rest.size()) break;
  }
  return out;
}

WidthSpec width_from_kv(
    const std::vector<std::pair<std::string, std::string>>& kv,
    const std::string& context) {
  WidthSpec w;
  for (const auto& [key, value] : kv) {
    if (key.size() < 2 || key[0] != 'a')
      throw std::invalid_argument(context + ": unknown key '" + key + "'");
    const int k = parse_int(context + " harmonic", key.substr(1));
    const auto comma = value.find(',');
    if (comma == std::string::npos)
      w.a[k] = cplx(parse_num(key, value), 0.0);
    else
      w.a[k] = parse_pair(key, value);
  }
  return w;
}

TablePtr make_table(const std::string& spec) {
  const TableSpec ts = split_table_spec(spec);
  if (ts.kind == "ellipse") {
    double a = 0, b = 0;
    bool have_a = false, have_b = false;
    for (const auto& [key, value] : ts.kv) {
      if (key == "a") { a = parse_num("a", value); have_a = true; }
      else if (key == "b") { b = parse_num("b", value); have_b = true; }
      else throw std::invalid_argument("ellipse: unknown key '" + key + "'");
    }
    if (!have_a || !have_b)
      throw std::invalid_argument("ellipse: needs a= and b=");
    return make_ellipse(a, b);
  }
  if (ts.kind == "width") {
    return make_width_table(width_from_kv(ts.kv, "width")).table;
  }
  if (ts.kind == "string") {
    StringSpec ss;
    bool have_c = false, have_l = false;
    std::vector<std::pair<std::string, std::string>> body;
    for (const auto& [key, value] : ts.kv) {
      if (key == "c") { ss.center = parse_pair("c", value); have_c = true; }
      else if (key == "l") { ss.length = parse_num("l", value); have_l = true; }
      else body.emplace_back(key, value);
    }
    ss.body = width_from_kv(body, "string");
    if (!have_c || !have_l)
      throw std::invalid_argument("string: needs c= and l=");
    return make_string_table(ss).table;
  }
  throw std::invalid_argument("table: unknown kind '" + ts.kind +
                              "' (ellipse|width|string)");
}

int cmd_table(const RunConfig& cfg, std::ostream& out) {
  const TablePtr table = make_table(cfg.table_spec);
  const auto samples = sample_curve(*table, cfg.samples);
  out << "table: " << table->label() << "\n";
  out << "length: " << fmt(table->total_length()) << "\n";
  out << "curvature: [" << fmt(table->min_curvature()) << ", "
      << fmt(table->max_curvature()) << "]\n";
  out << "diameter: " << fmt(table->diameter()) << "\n";
  if (!cfg.csv_path.empty()) {
    write_file(cfg.csv_path, curve_csv(samples));
    out << "csv: " << cfg.csv_path << " (" << samples.size() << " rows)\n";
  }
  if (!cfg.svg_path.empty()) {
    std::vector<SvgPoint> pts;
    pts.reserve(samples.size());
    for (const auto& s : samples) pts.push_back({s.point.real(), s.point.imag(), 0});
    emit_svg(cfg.svg_path, pts);
    out << "svg: " << cfg.svg_path << "\n";
  }
  return 0;
}

int cmd_arc(const RunConfig& cfg, std::ostream& out) {
  const ArcClass cls = parse_arc_class("class", cfg.arc_class);
  const KeplerArc arc =
      solve_arc(cfg.p0, cfg.p1, cls, cfg.h, cfg.mu, cfg.tol_quad);
  out << "class: " << to_string(arc.cls) << "\n";
  out << "length: " << fmt(arc.length) << "\n";
  out << "r_min: " << fmt(arc.r_min) << "\n";
  out << "transit_time: " << fmt(arc.transit_time) << "\n";
  out << "v0: " << fmt(arc.v0.real()) << "," << fmt(arc.v0.imag()) << "\n";
  out << "v1: " << fmt(arc.v1.real()) << "," << fmt(arc.v1.imag()) << "\n";
  const int n = cfg.samples;
  if (!cfg.csv_path.empty()) {
    std::string csv = "tau,x,y,r\n";
    for (int i = 0; i <= n; ++i) {
      const double tau = arc.path.T * i / n;
      const cplx z = arc.position(tau);
      csv += fmt(tau) + "," + fmt(z.real()) + "," + fmt(z.imag()) + "," +
             fmt(std::abs(z)) + "\n";
    }
    write_file(cfg.csv_path, csv);
    out << "csv: " << cfg.csv_path << "\n";
  }
  if (!cfg.svg_path.empty()) {
    std::vector<SvgPoint> pts;
    for (int i = 0; i <= n; ++i) {
      const cplx z = arc.position(arc.path.T * i / n);
      pts.push_back({z.real(), z.imag(), 0});
    }
    pts.push_back({0.0, 0.0, 1});  // the attracting center
    emit_svg(cfg.svg_path, pts);
    out << "svg: " << cfg.svg_path << "\n";
  }
  return 0;
}

int cmd_portrait(const RunConfig& cfg, std::ostream& out) {
  const TablePtr table = make_table(cfg.table_spec);
  const BilliardScene scene{*table, cfg.center, cfg.mu, cfg.h};
  const WellDefined wd = well_defined_check(scene);
  std::vector<PhaseState> seeds;
  seeds.reserve(cfg.seeds);
  const int N = cfg.seeds;
  for (int k = 0; k < N; ++k)
    seeds.push_back({two_pi * k / N, pi * (0.1 + 0.8 * (k + 0.5) / N)});
  const KeplerOrbitTable tab = portrait(scene, seeds, cfg.bounces, Exec::Parallel);
  out << "seeds: " << N << "\n";
  out << "bounces: " << tab.steps_per_seed << "\n";
  out << "well_defined: " << (wd.ok ? "yes" : "no")
      << " (margin " << fmt(wd.margin, "%.6g") << ")\n";
  out << "truncated: " << tab.truncated_orbits << "\n";
  double worst = 0;
  for (const auto& r : tab.rows)
    if (r.valid) worst = std::max(worst, r.energy_residual);
  out << "max_energy_residual: " << fmt(worst, "%.6g") << "\n";
  if (!cfg.csv_path.empty()) {
    write_file(cfg.csv_path, portrait_csv(tab));
    out << "csv: " << cfg.csv_path << "\n";
  }
  if (!cfg.svg_path.empty()) {
    std::vector<SvgPoint> pts;
    for (const auto& r : tab.rows)
      if (r.valid) pts.push_back({r.u, r.alpha, r.seed_id});
    emit_svg(cfg.svg_path, pts);
    out << "svg: " << cfg.svg_path << "\n";
  }
  return 0;
}

int cmd_focal(const RunConfig& cfg, std::ostream& out) {
  const TablePtr table = make_table(cfg.table_spec);
  const FocalVerdict v = is_focal(*table, cfg.center, cfg.tol_focal);
  const KindReport kind = classify_kind(*table, cfg.center);
  out << "table: " << table->label() << "\n";
  out << "center: " << fmt(cfg.center.real()) << "," << fmt(cfg.center.imag())
      << "\n";
  out << "focal: " << (v.focal ? "yes" : v.inconclusive ? "inconclusive" : "no")
      << "\n";
  out << "variation: " << fmt(v.variation) << "\n";
  out << "mean: " << fmt(v.mean) << "\n";
  out << "kind: " << (kind.kind == PointKind::First ? "first" : "second");
  if (kind.readings_disagree) out << " (same-type reading disagrees)";
  out << "\n";
  out << "distance_criticals: " << kind.criticals.size() << " ("
      << kind.antipodal_pairs.size() << " antipodal pairs)\n";
  if (kind.degenerate_continuum) out << "degenerate: distance is constant\n";
  return 0;
}

int cmd_psi(const RunConfig& cfg, std::ostream& out) {
  const TablePtr table = make_table(cfg.table_spec);
  const PsiCriticalSet cps =
      critical_points_psi(*table, cfg.center, Exec::Parallel);
  out << "critical_points: " << cps.points.size() << "\n";
  if (cps.focal_ridge) out << "focal_ridge: yes\n";
  if (cps.unresolved_cells)
    out << "unresolved_cells: " << cps.unresolved_cells << "\n";
  int index_sum = 0;
  for (const auto& p : cps.points) {
    index_sum += p.index;
    out << "  xi=" << fmt(p.xi, "%.12g") << " eta=" << fmt(p.eta, "%.12g")
        << " index=" << p.index << " level=" << fmt(p.level, "%.12g")
        << (p.area_flag ? " antipodal" : "") << "\n";
  }
  out << "index_sum: " << index_sum << "\n";
  if (!cfg.csv_path.empty()) {
    write_file(cfg.csv_path, psi_csv(cps));
    out << "csv: " << cfg.csv_path << "\n";
  }
  if (!cfg.svg_path.empty()) {
    std::vector<SvgPoint> pts;
    for (const auto& p : cps.points) pts.push_back({p.xi, p.eta, p.index + 1});
    emit_svg(cfg.svg_path, pts);
    out << "svg: " << cfg.svg_path << "\n";
  }
  return 0;
}

int cmd_shadow(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const TablePtr table = make_table(cfg.table_spec);
  const BilliardScene scene{*table, cfg.center, cfg.mu, cfg.h};
  const SymbolWord word = parse_word(cfg.word);
  const PsiCriticalSet cps =
      critical_points_psi(*table, cfg.center, Exec::Parallel);
  const KindReport kind = classify_kind(*table, cfg.center);
  const Selection sel = select_intervals(*table, cfg.center, cps, kind);
  if (!sel.ok) {
    err << "selection rejected: " << sel.reason << "\n";
    return 1;
  }
  if (word.alphabet != sel.domain.alphabet) {
    err << "word '" << to_string(word) << "' uses the "
        << (word.alphabet == SymbolWord::Alphabet::Triangle ? "triangle"
                                                            : "degenerate")
        << " alphabet but this center admits the other one\n";
    return 1;
  }
  SolveOptions opts;
  opts.grad_tol = cfg.tol_grad;
  const RealizedOrbit orbit = solve_word(word, scene, sel.domain, opts);
  out << "word: " << to_string(word) << "\n";
  out << "alphabet: "
      << (word.alphabet == SymbolWord::Alphabet::Triangle ? "triangle"
                                                          : "degenerate")
      << "\n";
  if (word.alphabet == SymbolWord::Alphabet::Degenerate)
    out << "transfer: " << to_string(sel.domain.transfer) << "\n";
  out << "bounces: " << orbit.bounces << "\n";
  out << "converged: " << (orbit.converged ? "yes" : "no") << " ("
      << orbit.newton_iterations << " iterations, " << orbit.multistarts_used + 1
      << " starts)\n";
  if (!orbit.converged) {
    err << "solver did not reach the gradient target\n";
    return 1;
  }
  out << "u:";
  for (double u : orbit.u) out << " " << fmt(u, "%.12g");
  out << "\n";
  if (orbit.collapsed)
    out << "collapsed: repeats a period-" << orbit.bounces / orbit.collapse_factor
        << " orbit " << orbit.collapse_factor << " times\n";
  out << "value: " << fmt(orbit.value) << "\n";
  out << "grad_inf: " << fmt(orbit.grad_inf, "%.6g") << "\n";
  const OrbitVerification v =
      verify_orbit(orbit, scene, sel.domain, cfg.tol_quad);
  out << "junction: " << fmt(v.max_junction, "%.6g") << "\n";
  out << "containment: " << fmt(v.containment, "%.6g") << "\n";
  out << "step_residual: " << fmt(v.step_residual, "%.6g") << "\n";
  out << "chained_residual: " << fmt(v.replay_residual, "%.6g") << "\n";
  out << "replay_cond: " << fmt(v.replay_cond, "%.6g") << "\n";
  out << "energy_drift: " << fmt(v.energy_drift, "%.6g") << "\n";
  if (!cfg.csv_path.empty()) {
    write_file(cfg.csv_path, orbit_csv(orbit, scene));
    out << "csv: " << cfg.csv_path << "\n";
  }
  if (!cfg.svg_path.empty()) {
    std::vector<SvgPoint> pts;
    for (const auto& s : sample_curve(*table, 512))
      pts.push_back({s.point.real(), s.point.imag(), 0});
    const int n = orbit.bounces;
    for (int j = 0; j < n; ++j) {
      const auto gv = generating_S(*table, cfg.center, orbit.u[j],
                                   orbit.u[(j + 1) % n], orbit.arcs[j],
                                   cfg.h, cfg.mu);
      for (int i = 0; i <= 64; ++i) {
        const cplx z = cfg.center + gv.arc.position(gv.arc.path.T * i / 64);
        pts.push_back({z.real(), z.imag(), 1 + j});
      }
    }
    emit_svg(cfg.svg_path, pts);
    out << "svg: " << cfg.svg_path << "\n";
  }
  // The chained replay is only binding when its conditioning floor sits
  // below the target; otherwise the leg-by-leg audit carries the verdict.
  const bool chained_conclusive = v.replay_cond * 1e-14 < 1e-6;
  const bool pass = orbit.converged && v.max_junction < 1e-8 &&
                    v.containment == 0 && v.step_ok && v.energy_drift < 1e-6 &&
                    (!chained_conclusive || v.replay_ok);
  out << "verification: " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

}  // namespace

RunConfig parse_config(const std::vector<std::string>& args,
                       const std::string& config_file) {
  RunConfig cfg;
  std::string config_path = config_file;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      config_path = args[i].substr(9);
  }
  if (!config_path.empty()) {
    read_config_file(cfg, config_path);
    cfg.config_path = config_path;
  }

  CLI::App app{"Kepler billiards in convex tables", "kb"};
  app.set_help_flag();  // handled by the caller, not the parser
  std::string center_s, p0_s, p1_s, ellipse_s, table_s;
  app.add_option("command", cfg.command);
  auto* topt = app.add_option("--table", table_s);
  auto* eopt = app.add_option("--ellipse", ellipse_s);
  app.add_option("--center", center_s);
  app.add_option("--mu", cfg.mu);
  app.add_option("--h", cfg.h);
  app.add_option("--seeds", cfg.seeds);
  app.add_option("--bounces", cfg.bounces);
  app.add_option("--samples", cfg.samples);
  app.add_option("--word", cfg.word);
  app.add_option("--p0", p0_s);
  app.add_option("--p1", p1_s);
  app.add_option("--class", cfg.arc_class);
  app.add_option("--csv", cfg.csv_path);
  app.add_option("--svg", cfg.svg_path);
  app.add_option("--config", cfg.config_path);
  app.add_option("--tol-quad", cfg.tol_quad);
  app.add_option("--tol-grad", cfg.tol_grad);
  app.add_option("--tol-focal", cfg.tol_focal);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    throw std::invalid_argument(e.what());
  }

  if (topt->count() && eopt->count())
    throw std::invalid_argument("--ellipse conflicts with --table");
  if (topt->count()) cfg.table_spec = table_s;
  if (eopt->count()) {
    const cplx ab = parse_pair("--ellipse", ellipse_s);  // validates
    (void)ab;
    const auto comma = ellipse_s.find(',');
    cfg.table_spec =
        "ellipse:a=" + trim(ellipse_s.substr(0, comma)) +
        ",b=" + trim(ellipse_s.substr(comma + 1));
  }
  if (!center_s.empty()) cfg.center = parse_pair("--center", center_s);
  if (!p0_s.empty()) cfg.p0 = parse_pair("--p0", p0_s);
  if (!p1_s.empty()) cfg.p1 = parse_pair("--p1", p1_s);

  if (cfg.command.empty())
    throw std::invalid_argument(
        "missing command (table|arc|portrait|focal|psi|shadow)");
  const bool known = cfg.command == "table" || cfg.command == "arc" ||
                     cfg.command == "portrait" || cfg.command == "focal" ||
                     cfg.command == "psi" || cfg.command == "shadow";
  if (!known)
    throw std::invalid_argument("unknown command '" + cfg.command + "'");
  if (!(cfg.h > 0)) throw std::invalid_argument("h: must be > 0");
  if (!(cfg.mu > 0)) throw std::invalid_argument("mu: must be > 0");
  if (cfg.seeds < 1) throw std::invalid_argument("seeds: must be >= 1");
  if (cfg.bounces < 1) throw std::invalid_argument("bounces: must be >= 1");
  if (cfg.samples < 2) throw std::invalid_argument("samples: must be >= 2");
  for (auto [v, key] : {std::pair{cfg.tol_quad, "tol-quad"},
                        {cfg.tol_grad, "tol-grad"},
                        {cfg.tol_focal, "tol-focal"}})
    if (!(v > 0)) throw std::invalid_argument(std::string(key) + ": must be > 0");
  parse_arc_class("class", cfg.arc_class);
  if (cfg.command == "shadow") {
    if (cfg.word.empty()) throw std::invalid_argument("shadow needs --word");
    parse_word(cfg.word);
  }
  return cfg;
}

std::string usage_text() {
  return
      "usage: kb <command> [flags]\n"
      "\n"
      "commands:\n"
      "  table      sample the boundary curve\n"
      "  arc        solve one Kepler arc between two points\n"
      "  portrait   iterate the billiard map from a deterministic seed grid\n"
      "  focal      test a center for focality and classify its kind\n"
      "  psi        locate critical points of the triangle perimeter\n"
      "  shadow     realize a periodic symbolic word and verify the orbit\n"
      "\n"
      "flags:\n"
      "  --table SPEC     ellipse:a=2,b=1 | width:a0=1,a3=RE,IM |\n"
      "                   string:a0=1,a3=0.33,c=3,0,l=6\n"
      "  --ellipse A,B    shorthand for --table ellipse:a=A,b=B\n"
      "  --center X,Y     attracting center (default 0,0)\n"
      "  --mu V           attraction strength (default 1)\n"
      "  --h V            energy level (default 1000)\n"
      "  --seeds N        portrait seed count (default 32)\n"
      "  --bounces N      billiard steps per seed (default 200)\n"
      "  --samples N      sample rows for table/arc output (default 512)\n"
      "  --word W         symbolic word for shadow, e.g. TT' or mM\n"
      "  --p0 X,Y         arc start, relative to the center (default 1,0)\n"
      "  --p1 X,Y         arc end (default 0,1)\n"
      "  --class C        arc class: direct | indirect | ccw | cw\n"
      "  --csv PATH       write the command's table as CSV\n"
      "  --svg PATH       write the command's picture as SVG\n"
      "  --config PATH    key = value file; flags override it\n"
      "  --tol-quad V     quadrature relative tolerance (default 1e-12)\n"
      "  --tol-grad V     word solver gradient target (default 1e-9)\n"
      "  --tol-focal V    focality variation bound (default 1e-6)\n";
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  if (args.empty()) {
    err << usage_text();
    return 2;
  }
  for (const auto& a : args)
    if (a == "--help" || a == "-h") {
      out << usage_text();
      return 0;
    }
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    if (cfg.command == "table") return cmd_table(cfg, out);
    if (cfg.command == "arc") return cmd_arc(cfg, out);
    if (cfg.command == "portrait") return cmd_portrait(cfg, out);
    if (cfg.command == "focal") return cmd_focal(cfg, out);
    if (cfg.command == "psi") return cmd_psi(cfg, out);
    return cmd_shadow(cfg, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace kb
