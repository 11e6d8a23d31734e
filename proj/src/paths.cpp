#include "trajfw/paths.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace trajfw {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty()) throw std::invalid_argument("TimeGrid: needs at least one time");
  for (double t : times_) {
    if (!std::isfinite(t) || t < 0.0 || t > 1.0)
      throw std::invalid_argument("TimeGrid: times must lie in [0,1]");
  }
  if (times_.size() == 1) return;
  if (times_.front() != 0.0 || times_.back() != 1.0)
    throw std::invalid_argument("TimeGrid: times must start at 0 and end at 1");
  for (std::size_t j = 1; j < times_.size(); ++j) {
    if (!(times_[j] > times_[j - 1]))
      throw std::invalid_argument("TimeGrid: times must be strictly increasing");
  }
}

TimeGrid TimeGrid::uniform(int intervals) {
  if (intervals < 0) throw std::invalid_argument("TimeGrid: negative interval count");
  if (intervals == 0) return TimeGrid({0.0});
  std::vector<double> t(intervals + 1);
  for (int j = 0; j <= intervals; ++j) t[j] = static_cast<double>(j) / intervals;
  t.back() = 1.0;
  return TimeGrid(std::move(t));
}

GridPtr make_grid(std::vector<double> times) {
  return std::make_shared<const TimeGrid>(std::move(times));
}

GridPtr make_uniform_grid(int intervals) {
  return std::make_shared<const TimeGrid>(TimeGrid::uniform(intervals));
}

KnotPath::KnotPath(GridPtr grid, std::vector<MassPos> knots)
    : grid_(std::move(grid)), knots_(std::move(knots)) {
  if (!grid_) throw std::invalid_argument("KnotPath: null grid");
  if (knots_.size() != grid_->size())
    throw std::invalid_argument("KnotPath: knot count " + std::to_string(knots_.size()) +
                                " does not match grid size " + std::to_string(grid_->size()));
  const std::size_t d = knots_.front().pos.size();
  if (d == 0) throw std::invalid_argument("KnotPath: zero-dimensional positions");
  for (const auto& k : knots_) {
    if (k.pos.size() != d) throw std::invalid_argument("KnotPath: mixed dimensions");
    if (!std::isfinite(k.mass) || k.mass < 0.0)
      throw std::invalid_argument("KnotPath: masses must be finite and nonnegative");
    for (double c : k.pos) {
      if (!std::isfinite(c) || c < 0.0 || c > 1.0)
        throw std::invalid_argument("KnotPath: positions must lie in the unit box");
    }
  }
}

double euclidean_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double flat_metric(const MassPos& a, const MassPos& b) {
  const double r1 = a.mass;
  const double r2 = b.mass;
  const double dx = euclidean_distance(a.pos, b.pos);
  if (r1 * r2 <= 0.0 || dx >= 2.0) return std::abs(r1) + std::abs(r2);
  return std::abs(r1 - r2) + std::min(std::abs(r1), std::abs(r2)) * dx;
}

double path_distance(const KnotPath& p, const KnotPath& q) {
  if (!(p.grid() == q.grid()))
    throw std::invalid_argument("path_distance: paths use incompatible time grids");
  double d = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) d = std::max(d, flat_metric(p[j], q[j]));
  return d;
}

KnotPath sample_phantom_path(const ContinuousPath& path, const GridPtr& grid) {
  constexpr double kPosSlack = 1e-9;
  constexpr double kMassSlack = 1e-12;
  std::vector<MassPos> knots;
  knots.reserve(grid->size());
  for (double t : grid->times()) {
    double h = path.mass_fn(t);
    if (h < 0.0 && h >= -kMassSlack) h = 0.0;
    if (h > 1.0 && h <= 1.0 + kMassSlack) h = 1.0;
    if (!(h >= 0.0)) throw std::invalid_argument("sample_phantom_path: negative mass");
    Point x = path.pos_fn(t);
    for (double& c : x) {
      if (c < -kPosSlack || c > 1.0 + kPosSlack)
        throw std::invalid_argument("sample_phantom_path: curve leaves the unit box at t=" +
                                    std::to_string(t));
      c = std::clamp(c, 0.0, 1.0);
    }
    knots.push_back({h, std::move(x)});
  }
  return KnotPath(grid, std::move(knots));
}

}  // namespace trajfw
