#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "trajfw/cli.hpp"
#include "trajfw/io.hpp"

using namespace trajfw;

int main(int argc, char** argv) {
  CLI::App app{"Trajectory reconstruction by sliding Frank-Wolfe with a DAG shortest-path oracle"};
  app.require_subcommand(1);

  PhantomOptions ph;
  auto* phantom = app.add_subcommand("phantom", "Synthesise data and ground truth for a phantom");
  phantom->add_option("name", ph.name, "balanced1 | balanced2 | unbalanced1 | unbalanced2")->required();
  phantom->add_option("--intervals,-T", ph.intervals, "Number of time intervals T");
  phantom->add_option("--K", ph.K, "Frequency cutoff, frequencies in {-K..K}^2");
  phantom->add_option("--window-sigma", ph.window_sigma, "Gaussian frequency damping");
  phantom->add_option("--schedule", ph.schedule, "all | rotate");
  phantom->add_option("--noise", ph.noise, "Relative noise level");
  phantom->add_option("--seed", ph.seed, "Noise seed");
  phantom->add_option("--data", ph.data_out, "Output data file");
  phantom->add_option("--truth", ph.truth_out, "Output ground-truth file");

  std::string config_path, data_path, sol_out, conv_out, cost_kind, strategy;
  double alpha = 0, beta = 0, delta = 0, phi0 = 0, vmax = 0, gap_tol = 0;
  int k = 1, N = 1, M = 0, max_iters = 0, threads = 1;
  std::uint64_t seed = 0;
  bool verbose = false;
  auto* rec = app.add_subcommand("reconstruct", "Run the solver on a data file");
  rec->add_option("--config,-c", config_path, "INI configuration file")->check(CLI::ExistingFile);
  auto* o_data = rec->add_option("--data", data_path, "Data file");
  auto* o_sol = rec->add_option("--out,-o", sol_out, "Solution output");
  auto* o_conv = rec->add_option("--convergence", conv_out, "Convergence CSV output");
  auto* o_cost = rec->add_option("--cost", cost_kind, "balanced | unbalanced");
  auto* o_alpha = rec->add_option("--alpha", alpha);
  auto* o_beta = rec->add_option("--beta", beta);
  auto* o_delta = rec->add_option("--delta", delta);
  auto* o_phi0 = rec->add_option("--phi0", phi0);
  auto* o_strategy = rec->add_option("--strategy", strategy, "uniform | random");
  auto* o_k = rec->add_option("--k", k, "Candidates per iteration");
  auto* o_N = rec->add_option("--N", N, "Spatial resolution");
  auto* o_M = rec->add_option("--M", M, "Mass resolution");
  auto* o_seed = rec->add_option("--seed", seed, "Random mesh seed");
  auto* o_vmax = rec->add_option("--vmax", vmax, "Speed bound, 0 disables");
  auto* o_iters = rec->add_option("--max-iters", max_iters);
  auto* o_gap = rec->add_option("--gap-tol", gap_tol, "Stop once the gap is below this, 0 disables");
  auto* o_threads = rec->add_option("--threads", threads, "Oracle threads, 0 = auto");
  rec->add_flag("--verbose,-v", verbose, "Print one line per iteration");

  EvaluateOptions ev;
  auto* eval = app.add_subcommand("evaluate", "Compare a solution with ground truth");
  eval->add_option("solution", ev.solution)->required()->check(CLI::ExistingFile);
  eval->add_option("truth", ev.truth)->required()->check(CLI::ExistingFile);
  eval->add_option("--data", ev.data, "Recompute energies against this data file");
  eval->add_option("--min-mass", ev.min_mass, "Skip position errors for true points lighter than this");
  eval->add_option("--cluster-radius", ev.cluster_radius, "Merge reconstructed points this close before slice matching");

  BenchOptions bo;
  auto* bench = app.add_subcommand("oracle-bench", "Time the DP oracle on uniform meshes");
  bench->add_option("--cost", bo.cost, "balanced | unbalanced");
  bench->add_option("--alpha", bo.alpha);
  bench->add_option("--beta", bo.beta);
  bench->add_option("--delta", bo.delta);
  bench->add_option("--intervals,-T", bo.intervals);
  bench->add_option("--mode", bo.mode, "mass | lattice | both");
  bench->add_option("--Ntilde", bo.Ntilde, "Lattice resolution in mass mode");
  bench->add_option("--sizes", bo.sizes, "Nodes per layer (mass mode) or lattice resolutions");
  bench->add_option("--threads", bo.threads);
  bench->add_option("--reps", bo.min_reps);
  bench->add_option("--out,-o", bo.out, "CSV output, default stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*phantom) return cmd_phantom(ph, std::cerr);
    if (*eval) return cmd_evaluate(ev, std::cout);
    if (*bench) return cmd_oracle_bench(bo, std::cout);

    RunConfig cfg = config_path.empty() ? parse_config("") : load_config(config_path);
    SolverConfig& s = cfg.solver;
    if (*o_data) cfg.data = data_path;
    if (*o_sol) cfg.solution_out = sol_out;
    if (*o_conv) cfg.convergence_out = conv_out;
    if (*o_cost) s.cost.kind = parse_cost_kind(cost_kind);
    if (*o_alpha) s.cost.alpha = alpha;
    if (*o_beta) s.cost.beta = beta;
    if (*o_delta) s.cost.delta = delta;
    if (*o_phi0) s.phi0 = phi0;
    if (*o_strategy) {
      int kk = 1, nn = 1, mm = 0;
      std::visit([&](const auto& m) { kk = m.k; nn = m.N; mm = m.M; }, s.mesh);
      if (strategy == "uniform" && !std::holds_alternative<UniformStrategy>(s.mesh))
        s.mesh = UniformStrategy{kk, nn, mm};
      else if (strategy == "random" && !std::holds_alternative<RandomStrategy>(s.mesh))
        s.mesh = RandomStrategy{kk, nn, mm, 0};
      else if (strategy != "uniform" && strategy != "random")
        throw std::invalid_argument("--strategy must be uniform or random");
    }
    std::visit(
        [&](auto& m) {
          if (*o_k) m.k = k;
          if (*o_N) m.N = N;
          if (*o_M) m.M = M;
        },
        s.mesh);
    if (*o_seed) {
      if (auto* r = std::get_if<RandomStrategy>(&s.mesh)) r->seed = seed;
    }
    if (*o_vmax) s.vmax = vmax > 0 ? std::optional<double>(vmax) : std::nullopt;
    if (*o_iters) s.max_iters = max_iters;
    if (*o_gap) s.gap_tol = gap_tol > 0 ? std::optional<double>(gap_tol) : std::nullopt;
    if (*o_threads) s.threads = threads;
    if (verbose) cfg.verbose = true;
    s.validate();
    return cmd_reconstruct(cfg, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
