#include "trajfw/cli.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "trajfw/evaluation.hpp"
#include "trajfw/io.hpp"
#include "trajfw/phantoms.hpp"

namespace trajfw {

namespace pt = boost::property_tree;

namespace {

void reject_unknown(const pt::ptree& tree) {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> known = {
      {"problem", {"data", "cost", "alpha", "beta", "delta", "phi0"}},
      {"mesh", {"strategy", "k", "N", "M", "seed", "vmax", "initial_Ntilde"}},
      {"solver", {"max_iters", "gap_tol", "stall_rtol", "insert_tol", "slide_gtol", "slide_max_iter", "dedup_tol", "threads",
                  "verbose"}},
      {"output", {"solution", "convergence"}}};
  for (const auto& [section, body] : tree) {
    const auto it = std::find_if(known.begin(), known.end(), [&](const auto& k) { return k.first == section; });
    if (it == known.end()) throw std::invalid_argument("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      (void)value;
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
        throw std::invalid_argument("config: unknown key '" + key + "' in [" + section + "]");
    }
  }
}

// get<T>(path, fallback) swallows conversion errors; only absent keys may fall back.
template <class T>
T value(const pt::ptree& tree, const std::string& path, T fallback) {
  if (!tree.get_child_optional(path)) return fallback;
  try {
    return tree.get<T>(path);
  } catch (const pt::ptree_bad_data&) {
    throw std::invalid_argument("config: cannot read '" + path + "' from '" + tree.get<std::string>(path) + "'");
  }
}

RunConfig from_tree(const pt::ptree& tree) {
  reject_unknown(tree);
  RunConfig cfg;
  SolverConfig& s = cfg.solver;
  cfg.data = value<std::string>(tree, "problem.data", "");
  s.cost.kind = parse_cost_kind(value<std::string>(tree, "problem.cost", "balanced"));
  s.cost.alpha = value<double>(tree, "problem.alpha", 0.5);
  s.cost.beta = value<double>(tree, "problem.beta", 0.5);
  s.cost.delta = value<double>(tree, "problem.delta", 0.1);
  s.phi0 = value<double>(tree, "problem.phi0", 0.1);

  const std::string strategy = value<std::string>(tree, "mesh.strategy", "uniform");
  const int k = value<int>(tree, "mesh.k", 1);
  const int M = value<int>(tree, "mesh.M", 0);
  if (strategy == "uniform") {
    s.mesh = UniformStrategy{k, value<int>(tree, "mesh.N", 64), M};
  } else if (strategy == "random") {
    s.mesh = RandomStrategy{k, value<int>(tree, "mesh.N", 25), M, value<std::uint64_t>(tree, "mesh.seed", 0)};
  } else {
    throw std::invalid_argument("config: mesh.strategy must be uniform or random");
  }
  const double vmax = value<double>(tree, "mesh.vmax", 0.0);
  if (vmax > 0.0) s.vmax = vmax;
  s.initial_Ntilde = value<int>(tree, "mesh.initial_Ntilde", 16);

  s.max_iters = value<int>(tree, "solver.max_iters", 100);
  const double gap_tol = value<double>(tree, "solver.gap_tol", 0.0);
  if (gap_tol > 0.0) s.gap_tol = gap_tol;
  s.stall_rtol = value<double>(tree, "solver.stall_rtol", 1e-10);
  s.insert_tol = value<double>(tree, "solver.insert_tol", 1e-12);
  s.slide_gtol = value<double>(tree, "solver.slide_gtol", 1e-8);
  s.slide_max_iter = value<int>(tree, "solver.slide_max_iter", 200);
  s.dedup_tol = value<double>(tree, "solver.dedup_tol", 1e-6);
  s.threads = value<int>(tree, "solver.threads", 1);
  cfg.verbose = value<bool>(tree, "solver.verbose", false);

  cfg.solution_out = value<std::string>(tree, "output.solution", cfg.solution_out);
  cfg.convergence_out = value<std::string>(tree, "output.convergence", cfg.convergence_out);
  s.validate();
  return cfg;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  std::istringstream is(text);
  pt::ptree tree;
  pt::read_ini(is, tree);
  return from_tree(tree);
}

RunConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

int exit_code(StopReason r) { return r == StopReason::MaxIters ? 2 : 0; }

int cmd_phantom(const PhantomOptions& opts, std::ostream& log) {
  const Phantom ph = make_phantom(opts.name);
  const auto tmpl = ModelTemplate::standard(opts.intervals, opts.K, opts.window_sigma, parse_schedule(opts.schedule));
  const ForwardModel fm = synthesize_data(ph, tmpl, opts.noise, opts.seed);
  write_text_file(opts.data_out, data_to_json(fm));
  Solution truth;
  truth.measure = ground_truth(ph, tmpl.grid);
  write_text_file(opts.truth_out, solution_to_json(truth));
  log << "phantom " << opts.name << ": " << ph.atoms.size() << " atoms, T=" << opts.intervals
      << ", noise " << opts.noise << " -> " << opts.data_out << ", " << opts.truth_out << "\n";
  return 0;
}

int cmd_reconstruct(const RunConfig& cfg, std::ostream& log) {
  if (cfg.data.empty()) throw std::invalid_argument("reconstruct: no data file given");
  const ForwardModel fm = data_from_json(read_text_file(cfg.data));
  SolverConfig sc = cfg.solver;
  if (cfg.verbose) {
    sc.on_iteration = [&log](const IterationRecord& r) {
      log << "iter " << r.iter << "  E=" << r.energy << "  gap=" << r.gap << "  atoms=" << r.atoms
          << "  mesh=" << r.mesh_N << "  t=" << r.time_ms << "ms\n";
    };
  }
  const SolveResult res = solve(sc, fm);

  Solution sol;
  sol.phi0 = sc.phi0;
  sol.measure = res.measure;
  sol.cost = sc.cost;
  sol.energy = energy(res.measure, fm, sc.cost);
  sol.stop_reason = stop_reason_name(res.reason);
  write_text_file(cfg.solution_out, solution_to_json(sol));
  std::ostringstream csv;
  write_convergence_csv(csv, res.records);
  write_text_file(cfg.convergence_out, csv.str());

  log << "stop: " << stop_reason_name(res.reason) << ", E=" << sol.energy->total << ", atoms=" << res.measure.size()
      << ", iterations=" << res.records.size() - 1 << "\n";
  return exit_code(res.reason);
}

int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out) {
  const Solution sol = solution_from_json(read_text_file(opts.solution));
  const Solution truth = solution_from_json(read_text_file(opts.truth));
  const MatchReport rep = match_atoms(sol.measure, truth.measure);
  const SliceReport sl = compare_slices(sol.measure, truth.measure, opts.min_mass, opts.cluster_radius);

  nlohmann::json j;
  j["recon_atoms"] = sol.measure.size();
  j["truth_atoms"] = truth.measure.size();
  j["atom_count_match"] = sol.measure.size() == truth.measure.size();
  nlohmann::json matches = nlohmann::json::array();
  for (const auto& m : rep.matches) {
    matches.push_back({{"truth", m.truth},
                       {"recon", m.recon},
                       {"distance", m.distance},
                       {"mass_error", m.mass_error},
                       {"position_error", m.position_error},
                       {"recon_weight", sol.measure.atoms()[m.recon].weight},
                       {"truth_weight", truth.measure.atoms()[m.truth].weight}});
  }
  j["matches"] = std::move(matches);
  j["unmatched_truth"] = rep.unmatched_truth;
  j["unmatched_recon"] = rep.unmatched_recon;
  j["slices"] = {{"max_position_error", sl.max_position_error},
                 {"max_mass_error", sl.max_mass_error},
                 {"min_mass", opts.min_mass},
                 {"cluster_radius", opts.cluster_radius}};

  if (!opts.data.empty()) {
    if (!sol.cost) throw std::invalid_argument("evaluate: the solution file records no cost");
    const ForwardModel fm = data_from_json(read_text_file(opts.data));
    const EnergyReport e = energy(sol.measure, fm, *sol.cost);
    const EnergyReport et = energy(truth.measure, fm, *sol.cost);
    j["energy"] = {{"total", e.total}, {"fidelity", e.fidelity}, {"regulariser", e.regulariser}};
    j["truth_energy"] = {{"total", et.total}, {"fidelity", et.fidelity}, {"regulariser", et.regulariser}};
  } else if (sol.energy) {
    j["energy"] = {{"total", sol.energy->total},
                   {"fidelity", sol.energy->fidelity},
                   {"regulariser", sol.energy->regulariser}};
  }
  out << j.dump(2) << "\n";
  return 0;
}

int cmd_oracle_bench(const BenchOptions& opts, std::ostream& out) {
  StepCost cost;
  cost.kind = parse_cost_kind(opts.cost);
  cost.alpha = opts.alpha;
  cost.beta = opts.beta;
  cost.delta = opts.delta;
  cost.validate();
  if (opts.mode != "mass" && opts.mode != "lattice" && opts.mode != "both")
    throw std::invalid_argument("oracle-bench: mode must be mass, lattice or both");

  std::vector<BenchRow> rows;
  if (opts.mode == "mass" || opts.mode == "both") {
    // N nodes per layer: N mass levels on a fixed lattice of (Ntilde+1)^2 points
    std::vector<BenchCase> cases;
    for (int n : opts.sizes) {
      if (n < 1) throw std::invalid_argument("oracle-bench: sizes must be positive");
      cases.push_back({opts.Ntilde, n - 1});
    }
    auto r = oracle_bench(cases, opts.intervals, cost, opts.min_reps, 0.2, opts.threads);
    for (auto& row : r) row.series = "mass_levels";
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (opts.mode == "lattice" || opts.mode == "both") {
    std::vector<BenchCase> cases;
    for (int n : opts.sizes) cases.push_back({n, 0});
    auto r = oracle_bench(cases, opts.intervals, cost, opts.min_reps, 0.2, opts.threads);
    for (auto& row : r) row.series = "lattice";
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (opts.out.empty()) {
    write_bench_csv(out, rows);
  } else {
    std::ostringstream os;
    write_bench_csv(os, rows);
    write_text_file(opts.out, os.str());
  }
  return 0;
}

}  // namespace trajfw
