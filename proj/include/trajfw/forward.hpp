#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "trajfw/paths.hpp"

namespace trajfw {

enum class Schedule { All, Rotate };

Schedule parse_schedule(const std::string& name);
std::string schedule_name(Schedule s);

/// Integer frequencies in {-K..K}^d with one representative of each +/- pair
/// (the zero frequency included), ordered lexicographically.
std::vector<Point> integer_frequencies(int K, int dim);

/// Per-time frequency lists. Under Rotate every time keeps the same number of
/// frequencies, ceil(m/2), chosen closest in angle to a direction that turns
/// through half a revolution over the grid.
class FrequencySet {
 public:
  FrequencySet() = default;
  FrequencySet(std::vector<Point> base, Schedule schedule, std::size_t times);

  const std::vector<Point>& base() const { return base_; }
  Schedule schedule() const { return schedule_; }
  std::size_t times() const { return per_time_.size(); }
  const std::vector<Point>& at(std::size_t j) const { return per_time_[j]; }

 private:
  std::vector<Point> base_;
  Schedule schedule_ = Schedule::All;
  std::vector<std::vector<Point>> per_time_;
};

struct WeightedPoint {
  double weight = 0.0;
  Point pos;
};
using Slice = std::vector<WeightedPoint>;

/// eta_j(x) = <u_j - b_j, kernel row at x>, evaluated as an exact trigonometric sum.
class GradientField {
 public:
  GradientField() = default;
  GradientField(int dim, std::vector<double> omega, std::vector<double> re, std::vector<double> im);

  int dim() const { return dim_; }
  double value(std::span<const double> x) const;
  /// Writes the spatial gradient into g and returns the value.
  double gradient(std::span<const double> x, std::span<double> g) const;

 private:
  int dim_ = 0;
  std::vector<double> omega_;  // 2*pi*k, row-major m x d
  std::vector<double> re_;     // damping * real residual
  std::vector<double> im_;     // damping * imaginary residual
};

std::vector<double> eta_gradient(const GradientField& field, std::span<const double> x);

/// Time-indexed smoothed Fourier samples: for each frequency k the pair
/// e^{-sigma^2 |k|^2 / 2} (cos 2 pi k.x, -sin 2 pi k.x), stored interleaved.
class ForwardModel {
 public:
  ForwardModel(GridPtr grid, FrequencySet freqs, double window_sigma,
               std::vector<std::vector<double>> data, double noise_level = 0.0,
               std::uint64_t seed = 0);

  const TimeGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const FrequencySet& frequencies() const { return freqs_; }
  int dim() const { return dim_; }
  double window_sigma() const { return window_sigma_; }
  double noise_level() const { return noise_level_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<std::vector<double>>& data() const { return data_; }

  std::size_t frequency_count(std::size_t j) const { return damping_[j].size(); }
  std::size_t measurement_size(std::size_t j) const { return 2 * damping_[j].size(); }

  std::vector<double> apply(std::size_t j, const Slice& slice) const;
  /// out += weight * kernel(x)
  void accumulate(std::size_t j, double weight, std::span<const double> x, std::span<double> out) const;
  /// Damped cos/sin of 2 pi k.x for each frequency at time j.
  void kernel(std::size_t j, std::span<const double> x, std::span<double> cos_out,
              std::span<double> sin_out) const;
  /// Field of <r, kernel row at x> for a coefficient vector r at time j.
  GradientField field(std::size_t j, std::span<const double> r) const;

  ForwardModel with_data(std::vector<std::vector<double>> data, double noise_level, std::uint64_t seed) const;

 private:
  GridPtr grid_;
  FrequencySet freqs_;
  double window_sigma_;
  std::vector<std::vector<double>> data_;
  double noise_level_;
  std::uint64_t seed_;
  int dim_ = 0;
  std::vector<std::vector<double>> omega_;
  std::vector<std::vector<double>> damping_;
};

/// Convex C^1 per-time fidelity F_j(u): returns the value and writes the gradient.
using FidelityFn = std::function<double(std::size_t j, std::span<const double> u,
                                        std::span<const double> b, std::span<double> grad)>;

/// 0.5 * |u - b|^2.
double quadratic_fidelity(std::size_t j, std::span<const double> u, std::span<const double> b,
                          std::span<double> grad);

struct Linearization {
  std::vector<GradientField> fields;
  double fidelity = 0.0;
};

/// Fields eta_j = A_j^* grad F_j(u_j) and the fidelity sum_j F_j(u_j).
Linearization eta(const ForwardModel& model, const std::vector<std::vector<double>>& u,
                  const FidelityFn& fidelity = quadratic_fidelity);

}  // namespace trajfw
