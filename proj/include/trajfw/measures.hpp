#pragma once

#include <vector>

#include "trajfw/forward.hpp"
#include "trajfw/paths.hpp"
#include "trajfw/transport.hpp"

namespace trajfw {

struct Atom {
  double weight = 0.0;
  KnotPath path;
};

/// Finite nonnegative combination of knot paths on one shared grid.
class AtomicMeasure {
 public:
  explicit AtomicMeasure(GridPtr grid) : grid_(std::move(grid)) {}
  AtomicMeasure(GridPtr grid, std::vector<Atom> atoms);

  const GridPtr& grid_ptr() const { return grid_; }
  const TimeGrid& grid() const { return *grid_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  double total_weight() const;

  void add(double weight, KnotPath path);
  /// Multiplies every weight by factor >= 0.
  AtomicMeasure scaled(double factor) const;

 private:
  GridPtr grid_;
  std::vector<Atom> atoms_;
};

/// The constant phi_0 of the feasible set D = {sigma >= 0 : phi_0 * mass(sigma) <= 1}.
struct FeasibleConfig {
  double phi0 = 0.1;
};

struct EnergyReport {
  double total = 0.0;
  double fidelity = 0.0;
  double regulariser = 0.0;
  std::vector<double> per_atom_cost;
};

/// Points (a_i h_i(t_j), x_i(t_j)); zero-weight entries are kept.
Slice time_slice(const AtomicMeasure& m, std::size_t j);

/// u_j = A_j (sigma at t_j) for every time.
std::vector<std::vector<double>> measurements(const AtomicMeasure& m, const ForwardModel& fm);

EnergyReport energy(const AtomicMeasure& m, const ForwardModel& fm, const StepCost& cost);

double feasibility_margin(const AtomicMeasure& m, const FeasibleConfig& cfg);

/// Drops zero-weight atoms and merges atoms whose path distance is within tol
/// into the earlier one, summing weights.
AtomicMeasure consolidate(const AtomicMeasure& m, double tol);

}  // namespace trajfw
