#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "trajfw/forward.hpp"
#include "trajfw/measures.hpp"
#include "trajfw/oracle.hpp"
#include "trajfw/transport.hpp"

namespace trajfw {

/// Fresh random layers every iteration.
struct RandomStrategy {
  int k = 1;
  int N = 25;
  int M = 0;
  std::uint64_t seed = 0;
};

/// Uniform lattice refined by doubling whenever an iteration stalls; stops
/// once the lattice resolution exceeds N.
struct UniformStrategy {
  int k = 1;
  int N = 64;
  int M = 0;
};

using MeshStrategy = std::variant<UniformStrategy, RandomStrategy>;

struct IterationRecord {
  int iter = 0;
  double energy = 0.0;
  double fidelity = 0.0;
  double regulariser = 0.0;
  double gap = 0.0;  // NaN on the initial row
  std::size_t atoms = 0;
  int mesh_N = 0;
  double time_ms = 0.0;
};

enum class StopReason { UniformConverged, MaxIters, GapBelow };

std::string stop_reason_name(StopReason r);
StopReason parse_stop_reason(const std::string& name);

struct SolverConfig {
  MeshStrategy mesh = UniformStrategy{};
  StepCost cost;
  double phi0 = 0.1;
  int max_iters = 100;
  std::optional<double> gap_tol;      // stop once the gap drops below this
  double stall_rtol = 1e-10;          // relative decrease counted as a stall
  double insert_tol = 1e-12;          // minimum line-search slope for an insertion
  double slide_gtol = 1e-8;
  int slide_max_iter = 200;
  double dedup_tol = 1e-6;
  int initial_Ntilde = 16;
  std::optional<double> vmax;
  int threads = 1;
  std::function<void(const IterationRecord&)> on_iteration;

  void validate() const;
};

struct SolveResult {
  AtomicMeasure measure;
  std::vector<IterationRecord> records;
  StopReason reason = StopReason::MaxIters;
  double final_gap = 0.0;  // gap of the last oracle call
};

/// Fields eta_j at the current iterate plus its fidelity.
Linearization linearize(const AtomicMeasure& m, const ForwardModel& fm);

/// sum_j h_j eta_j(x_j) + w(path).
double linearized_energy(const KnotPath& path, const Linearization& lin, const StepCost& cost);

/// Knot variables in sqrt-mass coordinates: per knot (sqrt h, x) or just x
/// for the balanced cost, atoms concatenated.
std::vector<double> pack_knots(const AtomicMeasure& m, bool balanced);
AtomicMeasure unpack_knots(const AtomicMeasure& shape, std::span<const double> v, bool balanced);

/// Linearised energy of a single path (shape's only atom) as a function of its
/// packed knot variables; writes the gradient when grad is non-empty.
double linearized_objective(const KnotPath& shape, std::span<const double> v, const Linearization& lin,
                            const StepCost& cost, std::span<double> grad);

/// Exact energy of shape's atoms with fixed weights as a function of the packed
/// knot variables; writes the gradient when grad is non-empty.
double exact_objective(const AtomicMeasure& shape, std::span<const double> v, const ForwardModel& fm,
                       const StepCost& cost, std::span<double> grad);

KnotPath slide_linearized(const KnotPath& candidate, const Linearization& lin, const StepCost& cost,
                          int max_iter = 200, double gtol = 1e-8);

/// E((1-lambda) m + lambda mu) = E(m) - slope * lambda + curvature * lambda^2 / 2
/// for mu = weight * delta_path. The slope equals the gap of mu against m.
struct SegmentQuadratic {
  double slope = 0.0;
  double curvature = 0.0;
};

SegmentQuadratic segment_quadratic(const AtomicMeasure& m, double weight, const KnotPath& path,
                                   const ForwardModel& fm, const StepCost& cost);

/// Exact minimiser over [0,1] of lambda -> E((1-lambda) m + lambda * weight * delta_path).
double line_search(const AtomicMeasure& m, double weight, const KnotPath& path,
                   const ForwardModel& fm, const StepCost& cost);

/// Minimises E over the weights alone: a >= 0, phi0 * sum(a) <= 1. Knots stay put.
AtomicMeasure optimize_weights(const AtomicMeasure& m, const ForwardModel& fm, const StepCost& cost,
                               double phi0);

struct SlideOptions {
  double phi0 = 0.1;
  int max_iter = 200;
  double gtol = 1e-8;
  double dedup_tol = 1e-6;
};

/// Knot descent with fixed weights, then the weight problem, then
/// consolidation. Returns m itself unless the energy went down.
AtomicMeasure slide_exact(const AtomicMeasure& m, const ForwardModel& fm, const StepCost& cost,
                          const SlideOptions& opts = {});

/// sum_i a_i Etilde(gamma_i) - min(Etilde*, 0) / phi0.
double dual_gap(const AtomicMeasure& m, const Linearization& lin, double oracle_value,
                const StepCost& cost, double phi0);

SolveResult solve(const SolverConfig& cfg, const ForwardModel& fm);

}  // namespace trajfw
