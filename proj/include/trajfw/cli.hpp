#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trajfw/solver.hpp"

namespace trajfw {

struct PhantomOptions {
  std::string name = "balanced1";
  int intervals = 21;
  int K = 3;
  double window_sigma = 0.2;
  std::string schedule = "all";
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string data_out = "data.json";
  std::string truth_out = "truth.json";
};

/// Everything `reconstruct` needs. Loaded from an INI file with sections
/// [problem], [mesh], [solver] and [output]; see README for the keys.
struct RunConfig {
  std::string data;
  SolverConfig solver;
  std::string solution_out = "solution.json";
  std::string convergence_out = "convergence.csv";
  bool verbose = false;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

struct EvaluateOptions {
  std::string solution;
  std::string truth;
  std::string data;  // optional: recompute the energy against this data
  double min_mass = 0.0;
  double cluster_radius = 0.0;  // merge reconstructed points this close before slice matching
};

struct BenchOptions {
  std::string cost = "unbalanced";
  double alpha = 0.5;
  double beta = 0.5;
  double delta = 0.1;
  int intervals = 20;
  std::string mode = "mass";  // mass | lattice | both
  int Ntilde = 7;
  std::vector<int> sizes = {8, 16, 32};
  int threads = 1;
  int min_reps = 3;
  std::string out;  // empty: stdout
};

int cmd_phantom(const PhantomOptions& opts, std::ostream& log);
int cmd_reconstruct(const RunConfig& cfg, std::ostream& log);
int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out);
int cmd_oracle_bench(const BenchOptions& opts, std::ostream& out);

/// Exit code for a finished solve: 0 when certified, 2 on the iteration cap.
int exit_code(StopReason r);

}  // namespace trajfw
