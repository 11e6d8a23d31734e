#pragma once

#include <cstddef>
#include <vector>

#include "trajfw/measures.hpp"

namespace trajfw {

/// Minimum-total-cost matching between rows and columns of a cost matrix
/// (rows x cols, row-major). Returns the matched column per row, -1 when the
/// row is left out (only when rows > cols). Exact up to 16 on the smaller side,
/// greedy beyond.
std::vector<int> assign(const std::vector<double>& cost, std::size_t rows, std::size_t cols);

/// The atom as a single path with masses a * h_j.
KnotPath effective_path(const Atom& a);

struct AtomMatch {
  std::size_t truth = 0;
  std::size_t recon = 0;
  double distance = 0.0;     // path distance of the effective paths
  double mass_error = 0.0;   // max_j |a h_j - a' h'_j|
  double position_error = 0.0;  // max_j |x_j - x'_j|
};

struct MatchReport {
  std::vector<AtomMatch> matches;
  std::vector<std::size_t> unmatched_truth;
  std::vector<std::size_t> unmatched_recon;
};

/// Pairs reconstructed atoms with true atoms by effective path distance.
MatchReport match_atoms(const AtomicMeasure& recon, const AtomicMeasure& truth);

/// Per-time comparison that ignores atom identity: at every time the points of
/// both slices are matched by flat distance. Positions are compared only for
/// true points of mass at least min_mass. A positive cluster_radius first
/// merges reconstructed points lying that close together.
struct SliceReport {
  std::vector<double> position_error;  // per time, max over compared pairs
  std::vector<double> mass_error;      // per time, includes unmatched points
  double max_position_error = 0.0;
  double max_mass_error = 0.0;
};

SliceReport compare_slices(const AtomicMeasure& recon, const AtomicMeasure& truth, double min_mass = 0.0,
                           double cluster_radius = 0.0);

/// Merges points chained by gaps of at most radius into their mass-weighted
/// centre; zero-weight points are dropped.
Slice cluster_slice(const Slice& s, double radius);

}  // namespace trajfw
