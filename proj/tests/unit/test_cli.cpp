#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "trajfw/cli.hpp"
#include "trajfw/io.hpp"

using namespace trajfw;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("trajfw_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

struct Run {
  int code = -1;
  std::string output;
};

Run run(const std::string& args, const Scratch& s) {
  const std::string log = s / "out.txt";
  const std::string cmd = std::string(TRAJFW_CLI_PATH) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = read_text_file(log);
  return r;
}

std::string slurp(const std::string& path) { return read_text_file(path); }

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(
      "[problem]\ndata = d.json\ncost = unbalanced\nalpha = 0.3\ndelta = 0.2\n"
      "[mesh]\nstrategy = random\nk = 3\nN = 12\nM = 4\nseed = 9\nvmax = 2.5\n"
      "[solver]\nmax_iters = 7\ngap_tol = 1e-6\nthreads = 2\n"
      "[output]\nsolution = s.json\nconvergence = c.csv\n");
  CHECK(cfg.data == "d.json");
  CHECK(cfg.solver.cost.kind == CostKind::UnbalancedWFR);
  CHECK(cfg.solver.cost.alpha == 0.3);
  CHECK(cfg.solver.cost.beta == 0.5);
  CHECK(cfg.solver.cost.delta == 0.2);
  const auto& r = std::get<RandomStrategy>(cfg.solver.mesh);
  CHECK(r.k == 3);
  CHECK(r.N == 12);
  CHECK(r.M == 4);
  CHECK(r.seed == 9);
  CHECK(*cfg.solver.vmax == 2.5);
  CHECK(cfg.solver.max_iters == 7);
  CHECK(*cfg.solver.gap_tol == 1e-6);
  CHECK(cfg.solver.threads == 2);
  CHECK(cfg.solution_out == "s.json");
  CHECK(cfg.convergence_out == "c.csv");

  const auto defaults = parse_config("");
  CHECK(std::get<UniformStrategy>(defaults.solver.mesh).N == 64);
  CHECK_FALSE(defaults.solver.vmax.has_value());
  CHECK_FALSE(defaults.solver.gap_tol.has_value());

  CHECK_THROWS(parse_config("[problem]\ncolour = blue\n"));
  CHECK_THROWS(parse_config("[extras]\nx = 1\n"));
  CHECK_THROWS(parse_config("[mesh]\nstrategy = hexagonal\n"));
  CHECK_THROWS(parse_config("[mesh]\nk = 0\n"));
  CHECK_THROWS(parse_config("[problem]\nalpha = lots\n"));
}

TEST_CASE("exit codes") {
  CHECK(exit_code(StopReason::UniformConverged) == 0);
  CHECK(exit_code(StopReason::GapBelow) == 0);
  CHECK(exit_code(StopReason::MaxIters) == 2);
}

TEST_CASE("end to end through the binary") {
  Scratch s;
  const std::string data = s / "data.json", truth = s / "truth.json";
  auto r = run("phantom balanced1 -T 5 --K 2 --data " + data + " --truth " + truth, s);
  REQUIRE(r.code == 0);
  const std::string first = slurp(data);
  REQUIRE(run("phantom balanced1 -T 5 --K 2 --data " + data + " --truth " + truth, s).code == 0);
  CHECK(slurp(data) == first);

  SUBCASE("zero iterations exit 2") {
    r = run("reconstruct --data " + data + " --max-iters 0 -o " + (s / "sol.json") + " --convergence " + (s / "c.csv"), s);
    CHECK(r.code == 2);
    const auto sol = solution_from_json(slurp(s / "sol.json"));
    CHECK(sol.measure.empty());
    CHECK(*sol.stop_reason == "max_iters");
  }

  SUBCASE("a converged uniform run exits 0 and evaluates") {
    const std::string ini = s / "run.ini";
    write_text_file(ini, "[problem]\ncost = balanced\n[mesh]\nN = 8\ninitial_Ntilde = 4\n[solver]\nmax_iters = 200\n");
    r = run("reconstruct -c " + ini + " --data " + data + " -o " + (s / "sol.json") + " --convergence " + (s / "c.csv"), s);
    CHECK(r.code == 0);
    std::ifstream csv(s / "c.csv");
    const auto recs = read_convergence_csv(csv);
    REQUIRE(recs.size() > 2);
    for (std::size_t n = 1; n < recs.size(); ++n) CHECK(recs[n].energy <= recs[n - 1].energy + 1e-10);
    CHECK(recs.back().mesh_N == 8);

    r = run("evaluate " + (s / "sol.json") + " " + truth + " --data " + data, s);
    REQUIRE(r.code == 0);
    const auto rep = nlohmann::json::parse(r.output);
    CHECK(rep["truth_atoms"] == 2);
    CHECK(rep["energy"]["total"].get<double>() <= rep["truth_energy"]["total"].get<double>());

    // command-line flags win over the file
    r = run("reconstruct -c " + ini + " --data " + data + " --max-iters 1 -o " + (s / "sol2.json") +
                " --convergence " + (s / "c2.csv"),
            s);
    CHECK(r.code == 2);
  }

  SUBCASE("evaluating the truth against itself") {
    r = run("evaluate " + truth + " " + truth, s);
    REQUIRE(r.code == 0);
    const auto rep = nlohmann::json::parse(r.output);
    CHECK(rep["atom_count_match"] == true);
    for (const auto& m : rep["matches"]) CHECK(m["distance"].get<double>() == 0.0);
  }

  SUBCASE("broken inputs") {
    write_text_file(s / "bad.json", "{\"times\": [0, 0.5, 1], \"data\": [");
    r = run("reconstruct --data " + (s / "bad.json") + " -o " + (s / "x.json") + " --convergence " + (s / "x.csv"), s);
    CHECK(r.code != 0);
    CHECK(r.output.find("error") != std::string::npos);
    CHECK_FALSE(fs::exists(s / "x.json"));

    r = run("reconstruct --data " + (s / "missing.json"), s);
    CHECK(r.code != 0);
    r = run("reconstruct --data " + data + " --cost sideways", s);
    CHECK(r.code != 0);
    r = run("phantom phantom9 --data " + (s / "p.json"), s);
    CHECK(r.code != 0);
    r = run("frobnicate", s);
    CHECK(r.code != 0);
  }

  SUBCASE("oracle bench") {
    r = run("oracle-bench -T 3 --Ntilde 3 --sizes 2 4 --reps 1 -o " + (s / "bench.csv"), s);
    REQUIRE(r.code == 0);
    std::istringstream is(slurp(s / "bench.csv"));
    std::string header, row;
    std::getline(is, header);
    CHECK(header == "series,label,intervals,nodes_per_layer,edges,ms,ratio");
    int rows = 0;
    while (std::getline(is, row))
      if (!row.empty()) ++rows;
    CHECK(rows == 2);
  }
}
