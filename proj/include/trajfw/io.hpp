#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trajfw/forward.hpp"
#include "trajfw/measures.hpp"
#include "trajfw/oracle.hpp"
#include "trajfw/solver.hpp"
#include "trajfw/transport.hpp"

namespace trajfw {

/// Contents of a solution or ground-truth file. Ground truth carries no cost,
/// energy or stop reason.
struct Solution {
  double phi0 = 0.1;
  AtomicMeasure measure{make_uniform_grid(1)};
  std::optional<StepCost> cost;
  std::optional<EnergyReport> energy;
  std::optional<std::string> stop_reason;
};

std::string solution_to_json(const Solution& s);
Solution solution_from_json(const std::string& text);

std::string data_to_json(const ForwardModel& fm);
ForwardModel data_from_json(const std::string& text);

std::string cost_kind_name(CostKind k);
CostKind parse_cost_kind(const std::string& name);

/// Header iter,energy,fidelity,regulariser,gap,atoms,mesh_N,time_ms.
void write_convergence_csv(std::ostream& os, const std::vector<IterationRecord>& records);
std::vector<IterationRecord> read_convergence_csv(std::istream& is);

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace trajfw
