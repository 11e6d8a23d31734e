#include "trajfw/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace trajfw {

using nlohmann::json;

namespace {

json knots_to_json(const KnotPath& p) {
  json ks = json::array();
  for (const auto& k : p.knots()) {
    json row = json::array({k.mass});
    for (double c : k.pos) row.push_back(c);
    ks.push_back(std::move(row));
  }
  return ks;
}

KnotPath knots_from_json(const json& ks, const GridPtr& grid) {
  std::vector<MassPos> knots;
  for (const auto& row : ks) {
    if (!row.is_array() || row.size() < 2) throw std::invalid_argument("knot rows need a mass and a position");
    MassPos k{row[0].get<double>(), {}};
    for (std::size_t c = 1; c < row.size(); ++c) k.pos.push_back(row[c].get<double>());
    knots.push_back(std::move(k));
  }
  return KnotPath(grid, std::move(knots));
}

double number_or_nan(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string cost_kind_name(CostKind k) { return k == CostKind::BalancedBB ? "balanced" : "unbalanced"; }

CostKind parse_cost_kind(const std::string& name) {
  if (name == "balanced" || name == "bb") return CostKind::BalancedBB;
  if (name == "unbalanced" || name == "wfr") return CostKind::UnbalancedWFR;
  throw std::invalid_argument("unknown cost '" + name + "' (expected balanced or unbalanced)");
}

std::string solution_to_json(const Solution& s) {
  json j;
  j["phi0"] = s.phi0;
  j["times"] = s.measure.grid().times();
  json atoms = json::array();
  for (const auto& a : s.measure.atoms()) atoms.push_back({{"weight", a.weight}, {"knots", knots_to_json(a.path)}});
  j["atoms"] = std::move(atoms);
  if (s.cost) {
    j["cost"] = {{"kind", cost_kind_name(s.cost->kind)},
                 {"alpha", s.cost->alpha},
                 {"beta", s.cost->beta},
                 {"delta", s.cost->delta}};
  }
  if (s.energy) {
    j["energy"] = {{"total", s.energy->total},
                   {"fidelity", s.energy->fidelity},
                   {"regulariser", s.energy->regulariser},
                   {"per_atom_cost", s.energy->per_atom_cost}};
  }
  if (s.stop_reason) j["stop_reason"] = *s.stop_reason;
  return j.dump(1) + "\n";
}

Solution solution_from_json(const std::string& text) {
  const json j = json::parse(text);
  Solution s;
  s.phi0 = j.value("phi0", 0.1);
  auto grid = make_grid(j.at("times").get<std::vector<double>>());
  s.measure = AtomicMeasure(grid);
  for (const auto& a : j.at("atoms")) s.measure.add(a.at("weight").get<double>(), knots_from_json(a.at("knots"), grid));
  if (j.contains("cost")) {
    const auto& c = j["cost"];
    StepCost cost;
    cost.kind = parse_cost_kind(c.at("kind").get<std::string>());
    cost.alpha = c.at("alpha").get<double>();
    cost.beta = c.at("beta").get<double>();
    cost.delta = c.value("delta", 0.1);
    cost.validate();
    s.cost = cost;
  }
  if (j.contains("energy")) {
    const auto& e = j["energy"];
    EnergyReport r;
    r.total = number_or_nan(e.at("total"));
    r.fidelity = number_or_nan(e.at("fidelity"));
    r.regulariser = number_or_nan(e.at("regulariser"));
    r.per_atom_cost = e.value("per_atom_cost", std::vector<double>{});
    s.energy = r;
  }
  if (j.contains("stop_reason")) s.stop_reason = j["stop_reason"].get<std::string>();
  return s;
}

std::string data_to_json(const ForwardModel& fm) {
  json j;
  j["times"] = fm.grid().times();
  j["frequencies"] = fm.frequencies().base();
  j["window_sigma"] = fm.window_sigma();
  j["schedule"] = schedule_name(fm.frequencies().schedule());
  j["data"] = fm.data();
  j["noise_level"] = fm.noise_level();
  j["seed"] = fm.seed();
  return j.dump() + "\n";
}

ForwardModel data_from_json(const std::string& text) {
  const json j = json::parse(text);
  auto grid = make_grid(j.at("times").get<std::vector<double>>());
  auto base = j.at("frequencies").get<std::vector<Point>>();
  const Schedule sched = parse_schedule(j.value("schedule", std::string("all")));
  return ForwardModel(grid, FrequencySet(std::move(base), sched, grid->size()), j.at("window_sigma").get<double>(),
                      j.at("data").get<std::vector<std::vector<double>>>(), j.value("noise_level", 0.0),
                      j.value("seed", std::uint64_t{0}));
}

void write_convergence_csv(std::ostream& os, const std::vector<IterationRecord>& records) {
  os << "iter,energy,fidelity,regulariser,gap,atoms,mesh_N,time_ms\n";
  for (const auto& r : records) {
    os << r.iter << ',' << csv_number(r.energy) << ',' << csv_number(r.fidelity) << ','
       << csv_number(r.regulariser) << ',' << csv_number(r.gap) << ',' << r.atoms << ',' << r.mesh_N << ','
       << std::fixed << std::setprecision(3) << r.time_ms << std::defaultfloat << '\n';
  }
}

std::vector<IterationRecord> read_convergence_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("iter,energy", 0) != 0)
    throw std::invalid_argument("convergence CSV: missing header");
  std::vector<IterationRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw std::invalid_argument("convergence CSV: expected 8 columns");
    IterationRecord r;
    r.iter = std::stoi(f[0]);
    r.energy = std::stod(f[1]);
    r.fidelity = std::stod(f[2]);
    r.regulariser = std::stod(f[3]);
    r.gap = f[4] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[4]);
    r.atoms = std::stoul(f[5]);
    r.mesh_N = std::stoi(f[6]);
    r.time_ms = std::stod(f[7]);
    out.push_back(r);
  }
  return out;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "series,label,intervals,nodes_per_layer,edges,ms,ratio\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    os << r.series << ',' << r.label << ',' << r.intervals << ',' << r.nodes_per_layer << ',' << std::setprecision(12) << r.edges
       << ',' << std::fixed << std::setprecision(3) << r.ms << std::defaultfloat << ',';
    if (i > 0 && rows[i - 1].series == r.series && rows[i - 1].ms > 0.0) os << std::setprecision(4) << r.ms / rows[i - 1].ms;
    os << '\n';
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace trajfw
