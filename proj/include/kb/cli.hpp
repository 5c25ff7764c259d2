#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kb/geom.hpp"

namespace kb {

// Everything a single invocation needs, with usable defaults. A config file
// (line-oriented `key = value`, # comments) fills fields first and explicit
// flags override it; unknown keys are rejected either way.
struct RunConfig {
  std::string command;  // table | arc | portrait | focal | psi | shadow

  // boundary: "ellipse:a=2,b=1", "width:a0=1,a3=0.05,0.02" (coefficient
  // values are re[,im]), "string:a0=1,a3=0.33,c=3,0,l=6"
  std::string table_spec = "ellipse:a=2,b=1";

  cplx center{0.0, 0.0};
  double mu = 1.0;
  double h = 1000.0;

  int seeds = 32;       // portrait seeds
  int bounces = 200;    // kmap steps per seed
  int samples = 512;    // curve CSV rows

  std::string word;     // shadow target, e.g. TT' or mM

  cplx p0{1.0, 0.0};    // arc endpoints relative to the center
  cplx p1{0.0, 1.0};
  std::string arc_class = "direct";  // direct | indirect | ccw | cw

  std::string csv_path;
  std::string svg_path;
  std::string config_path;

  double tol_quad = 1e-12;   // quadrature relative tolerance
  double tol_grad = 1e-9;    // word solver gradient target
  double tol_focal = 1e-6;   // relative variation bound for focality
};

// Parses flags (and the config file named by `config_file` or --config) into
// a validated RunConfig. Throws std::invalid_argument with a one-line
// diagnostic naming the offending key on any conflict, unknown key, malformed
// value, or missing requirement.
RunConfig parse_config(const std::vector<std::string>& args,
                       const std::string& config_file = "");

// One-line-per-flag usage text.
std::string usage_text();

// Dispatches a parsed config. Exit status 0 on success, 1 when the requested
// computation fails numerically (the module error is reported verbatim), 2 on
// usage errors. Empty args print the usage text and return 2.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace kb
