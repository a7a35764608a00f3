#pragma once

// Command-line front end: seeded verification sweeps, region data for the
// theta family, and single-state demos.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qguess {

enum class Command { Verify, Region, Demo };

struct RunConfig {
  Command command = Command::Verify;
  int d = 2;
  int dim_b = 2;
  int dim_e = -1;  // -1: same as d
  int count = 10;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  std::string output_path;  // empty: stdout
  std::string format;       // csv | json; empty picks the command default
  int grid = 257;
  std::string state = "phi";  // demo: phi | ghz | theta | product | random
  double theta = 0.0;
};

// Throws std::invalid_argument on an invalid configuration.
void validate(const RunConfig& cfg);

// Exit status: 0 all pass, 1 some FAIL, 2 usage or I/O error.
int run_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_region(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_demo(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Parses argv-style arguments (args[0] is the program name) and dispatches.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qguess
