#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

namespace trajfw {

using Point = std::vector<double>;

/// Observation times t_0 < ... < t_T. A grid with more than one time must
/// start at 0 and end at 1; a single-time grid may sit anywhere in [0,1].
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times);

  /// T+1 equispaced times j/T.
  static TimeGrid uniform(int intervals);

  std::size_t size() const { return times_.size(); }
  int intervals() const { return static_cast<int>(times_.size()) - 1; }
  double operator[](std::size_t j) const { return times_[j]; }
  /// t_j - t_{j-1}, j >= 1.
  double dt(std::size_t j) const { return times_[j] - times_[j - 1]; }
  const std::vector<double>& times() const { return times_; }

  bool operator==(const TimeGrid&) const = default;

 private:
  std::vector<double> times_;
};

using GridPtr = std::shared_ptr<const TimeGrid>;

GridPtr make_grid(std::vector<double> times);
GridPtr make_uniform_grid(int intervals);

struct MassPos {
  double mass = 0.0;
  Point pos;
};

/// A path stored at the knot times of its grid. Positions live in [0,1]^d,
/// masses are nonnegative (the solver keeps them in [0,1]; sampled
/// ground-truth curves may exceed 1 before normalisation into a measure).
class KnotPath {
 public:
  KnotPath(GridPtr grid, std::vector<MassPos> knots);

  const TimeGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return knots_.size(); }
  int dim() const { return static_cast<int>(knots_.front().pos.size()); }
  const MassPos& operator[](std::size_t j) const { return knots_[j]; }
  const std::vector<MassPos>& knots() const { return knots_; }

 private:
  GridPtr grid_;
  std::vector<MassPos> knots_;
};

/// Ground-truth curve t -> (h(t), gamma(t)) on [0,1].
struct ContinuousPath {
  std::function<double(double)> mass_fn;
  std::function<Point(double)> pos_fn;
};

/// Flat metric between two mass-position pairs; masses may be signed.
double flat_metric(const MassPos& a, const MassPos& b);

/// max_j flat_metric(p_j, q_j). Throws std::invalid_argument when the grids differ.
double path_distance(const KnotPath& p, const KnotPath& q);

/// Evaluates a continuous curve at the grid times. Positions within 1e-9 of the
/// unit box are clamped onto it, further out is an error.
KnotPath sample_phantom_path(const ContinuousPath& path, const GridPtr& grid);

double euclidean_distance(const Point& a, const Point& b);

}  // namespace trajfw
