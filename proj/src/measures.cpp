#include "trajfw/measures.hpp"

#include <cmath>
#include <stdexcept>

namespace trajfw {

AtomicMeasure::AtomicMeasure(GridPtr grid, std::vector<Atom> atoms) : grid_(std::move(grid)) {
  for (auto& a : atoms) add(a.weight, std::move(a.path));
}

void AtomicMeasure::add(double weight, KnotPath path) {
  if (!std::isfinite(weight) || weight < 0.0)
    throw std::invalid_argument("AtomicMeasure: weights must be finite and nonnegative");
  if (!(path.grid() == *grid_)) throw std::invalid_argument("AtomicMeasure: atom uses a different time grid");
  atoms_.push_back({weight, std::move(path)});
}

double AtomicMeasure::total_weight() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.weight;
  return s;
}

AtomicMeasure AtomicMeasure::scaled(double factor) const {
  AtomicMeasure out(grid_);
  for (const auto& a : atoms_) out.add(a.weight * factor, a.path);
  return out;
}

Slice time_slice(const AtomicMeasure& m, std::size_t j) {
  if (j >= m.grid().size()) throw std::out_of_range("time_slice: time index out of range");
  Slice s;
  s.reserve(m.size());
  for (const auto& a : m.atoms()) s.push_back({a.weight * a.path[j].mass, a.path[j].pos});
  return s;
}

std::vector<std::vector<double>> measurements(const AtomicMeasure& m, const ForwardModel& fm) {
  std::vector<std::vector<double>> u(fm.grid().size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    u[j].assign(fm.measurement_size(j), 0.0);
    for (const auto& a : m.atoms()) fm.accumulate(j, a.weight * a.path[j].mass, a.path[j].pos, u[j]);
  }
  return u;
}

EnergyReport energy(const AtomicMeasure& m, const ForwardModel& fm, const StepCost& cost) {
  if (!(m.grid() == fm.grid())) throw std::invalid_argument("energy: measure and data use different time grids");
  EnergyReport r;
  const auto u = measurements(m, fm);
  for (std::size_t j = 0; j < u.size(); ++j) {
    for (std::size_t i = 0; i < u[j].size(); ++i) {
      const double d = u[j][i] - fm.data()[j][i];
      r.fidelity += 0.5 * d * d;
    }
  }
  for (const auto& a : m.atoms()) {
    const double w = path_cost(cost, a.path);
    r.per_atom_cost.push_back(w);
    r.regulariser += a.weight * w;
  }
  r.total = r.fidelity + r.regulariser;
  return r;
}

double feasibility_margin(const AtomicMeasure& m, const FeasibleConfig& cfg) {
  return 1.0 - cfg.phi0 * m.total_weight();
}

AtomicMeasure consolidate(const AtomicMeasure& m, double tol) {
  if (tol < 0.0) throw std::invalid_argument("consolidate: tol must be >= 0");
  std::vector<Atom> kept;
  for (const auto& a : m.atoms()) {
    if (a.weight <= 0.0) continue;
    bool merged = false;
    for (auto& k : kept) {
      if (path_distance(k.path, a.path) <= tol) {
        k.weight += a.weight;
        merged = true;
        break;
      }
    }
    if (!merged) kept.push_back(a);
  }
  return AtomicMeasure(m.grid_ptr(), std::move(kept));
}

}  // namespace trajfw
