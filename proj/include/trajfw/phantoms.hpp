#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trajfw/forward.hpp"
#include "trajfw/measures.hpp"
#include "trajfw/paths.hpp"

namespace trajfw {

struct PhantomAtom {
  double weight = 1.0;
  ContinuousPath path;
};

/// Synthetic ground truth: balanced1, balanced2, unbalanced1 or unbalanced2.
struct Phantom {
  std::string name;
  bool balanced = true;
  std::vector<PhantomAtom> atoms;
};

Phantom make_phantom(const std::string& name);

/// Everything about the measurement except the data itself.
struct ModelTemplate {
  GridPtr grid;
  std::vector<Point> frequencies;
  Schedule schedule = Schedule::All;
  double window_sigma = 0.2;

  /// T intervals on a uniform grid and integer frequencies {-K..K}^2.
  static ModelTemplate standard(int intervals, int K = 3, double window_sigma = 0.2,
                                Schedule schedule = Schedule::All);
};

/// The phantom sampled at the grid times as a measure whose knot masses lie in
/// [0,1]: an atom whose sampled mass peaks at s > 1 is stored with weight a*s
/// and masses h/s.
AtomicMeasure ground_truth(const Phantom& ph, const GridPtr& grid);

/// Clean data A_j(truth at t_j) plus i.i.d. Gaussian noise rescaled so that
/// |noise| = noise_level * |clean data| over all times together.
ForwardModel synthesize_data(const Phantom& ph, const ModelTemplate& tmpl, double noise_level,
                             std::uint64_t seed);

}  // namespace trajfw
