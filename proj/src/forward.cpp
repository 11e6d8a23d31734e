#include "trajfw/forward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace trajfw {

Schedule parse_schedule(const std::string& name) {
  if (name == "all") return Schedule::All;
  if (name == "rotate") return Schedule::Rotate;
  throw std::invalid_argument("unknown frequency schedule '" + name + "'");
}

std::string schedule_name(Schedule s) { return s == Schedule::All ? "all" : "rotate"; }

std::vector<Point> integer_frequencies(int K, int dim) {
  if (K < 0 || dim < 1) throw std::invalid_argument("integer_frequencies: need K >= 0 and dim >= 1");
  std::vector<Point> out;
  std::vector<int> k(dim, -K);
  while (true) {
    // keep k if its first nonzero coordinate is positive, or k == 0
    int first = 0;
    for (int c : k) {
      if (c != 0) {
        first = c;
        break;
      }
    }
    if (first >= 0) {
      bool zero = std::all_of(k.begin(), k.end(), [](int c) { return c == 0; });
      if (first > 0 || zero) out.emplace_back(k.begin(), k.end());
    }
    int i = dim - 1;
    while (i >= 0 && k[i] == K) k[i--] = -K;
    if (i < 0) break;
    ++k[i];
  }
  return out;
}

FrequencySet::FrequencySet(std::vector<Point> base, Schedule schedule, std::size_t times)
    : base_(std::move(base)), schedule_(schedule) {
  if (base_.empty()) throw std::invalid_argument("FrequencySet: no frequencies");
  const std::size_t d = base_.front().size();
  for (const auto& k : base_) {
    if (k.size() != d) throw std::invalid_argument("FrequencySet: mixed frequency dimensions");
  }
  per_time_.resize(times);
  if (schedule_ == Schedule::All) {
    for (auto& f : per_time_) f = base_;
    return;
  }
  const std::size_t keep = (base_.size() + 1) / 2;
  std::vector<double> angle(base_.size(), -1.0);
  for (std::size_t i = 0; i < base_.size(); ++i) {
    const double kx = base_[i][0];
    const double ky = d > 1 ? base_[i][1] : 0.0;
    if (kx == 0.0 && ky == 0.0) continue;
    double a = std::atan2(ky, kx);
    if (a < 0.0) a += std::numbers::pi;
    if (a >= std::numbers::pi) a -= std::numbers::pi;
    angle[i] = a;
  }
  for (std::size_t j = 0; j < times; ++j) {
    const double centre = std::numbers::pi * static_cast<double>(j) / static_cast<double>(times);
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < base_.size(); ++i) {
      double dist = 0.0;
      if (angle[i] >= 0.0) {
        dist = std::abs(angle[i] - centre);
        dist = std::min(dist, std::numbers::pi - dist);
      }
      ranked.emplace_back(dist, i);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<std::size_t> chosen;
    for (std::size_t r = 0; r < keep; ++r) chosen.push_back(ranked[r].second);
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t i : chosen) per_time_[j].push_back(base_[i]);
  }
}

GradientField::GradientField(int dim, std::vector<double> omega, std::vector<double> re,
                             std::vector<double> im)
    : dim_(dim), omega_(std::move(omega)), re_(std::move(re)), im_(std::move(im)) {}

double GradientField::value(std::span<const double> x) const {
  double v = 0.0;
  for (std::size_t i = 0; i < re_.size(); ++i) {
    double phase = 0.0;
    for (int c = 0; c < dim_; ++c) phase += omega_[i * dim_ + c] * x[c];
    v += re_[i] * std::cos(phase) - im_[i] * std::sin(phase);
  }
  return v;
}

double GradientField::gradient(std::span<const double> x, std::span<double> g) const {
  std::fill(g.begin(), g.end(), 0.0);
  double v = 0.0;
  for (std::size_t i = 0; i < re_.size(); ++i) {
    double phase = 0.0;
    for (int c = 0; c < dim_; ++c) phase += omega_[i * dim_ + c] * x[c];
    const double cs = std::cos(phase);
    const double sn = std::sin(phase);
    v += re_[i] * cs - im_[i] * sn;
    const double dphase = -re_[i] * sn - im_[i] * cs;
    for (int c = 0; c < dim_; ++c) g[c] += dphase * omega_[i * dim_ + c];
  }
  return v;
}

std::vector<double> eta_gradient(const GradientField& field, std::span<const double> x) {
  std::vector<double> g(field.dim());
  field.gradient(x, g);
  return g;
}

ForwardModel::ForwardModel(GridPtr grid, FrequencySet freqs, double window_sigma,
                           std::vector<std::vector<double>> data, double noise_level,
                           std::uint64_t seed)
    : grid_(std::move(grid)),
      freqs_(std::move(freqs)),
      window_sigma_(window_sigma),
      data_(std::move(data)),
      noise_level_(noise_level),
      seed_(seed) {
  if (!grid_) throw std::invalid_argument("ForwardModel: null grid");
  if (!(window_sigma_ >= 0.0)) throw std::invalid_argument("ForwardModel: window_sigma must be >= 0");
  if (freqs_.times() != grid_->size())
    throw std::invalid_argument("ForwardModel: frequency schedule does not cover every time");
  dim_ = static_cast<int>(freqs_.base().front().size());
  const std::size_t m0 = freqs_.at(0).size();
  omega_.resize(grid_->size());
  damping_.resize(grid_->size());
  for (std::size_t j = 0; j < grid_->size(); ++j) {
    const auto& ks = freqs_.at(j);
    if (ks.size() != m0) throw std::invalid_argument("ForwardModel: frequency count must not depend on time");
    for (const auto& k : ks) {
      double k2 = 0.0;
      for (double c : k) {
        omega_[j].push_back(2.0 * std::numbers::pi * c);
        k2 += c * c;
      }
      damping_[j].push_back(std::exp(-window_sigma_ * window_sigma_ * k2 / 2.0));
    }
  }
  if (data_.empty()) data_.assign(grid_->size(), {});
  if (data_.size() != grid_->size()) throw std::invalid_argument("ForwardModel: one data vector per time is required");
  for (std::size_t j = 0; j < data_.size(); ++j) {
    if (data_[j].empty()) data_[j].assign(measurement_size(j), 0.0);
    if (data_[j].size() != measurement_size(j))
      throw std::invalid_argument("ForwardModel: data length at time " + std::to_string(j) +
                                  " does not match 2 x frequency count");
  }
}

void ForwardModel::kernel(std::size_t j, std::span<const double> x, std::span<double> cos_out,
                          std::span<double> sin_out) const {
  const auto& om = omega_[j];
  const auto& dm = damping_[j];
  for (std::size_t i = 0; i < dm.size(); ++i) {
    double phase = 0.0;
    for (int c = 0; c < dim_; ++c) phase += om[i * dim_ + c] * x[c];
    cos_out[i] = dm[i] * std::cos(phase);
    sin_out[i] = dm[i] * std::sin(phase);
  }
}

void ForwardModel::accumulate(std::size_t j, double weight, std::span<const double> x,
                              std::span<double> out) const {
  const auto& om = omega_[j];
  const auto& dm = damping_[j];
  for (std::size_t i = 0; i < dm.size(); ++i) {
    double phase = 0.0;
    for (int c = 0; c < dim_; ++c) phase += om[i * dim_ + c] * x[c];
    out[2 * i] += weight * dm[i] * std::cos(phase);
    out[2 * i + 1] -= weight * dm[i] * std::sin(phase);
  }
}

std::vector<double> ForwardModel::apply(std::size_t j, const Slice& slice) const {
  std::vector<double> out(measurement_size(j), 0.0);
  for (const auto& p : slice) accumulate(j, p.weight, p.pos, out);
  return out;
}

GradientField ForwardModel::field(std::size_t j, std::span<const double> r) const {
  const auto& dm = damping_[j];
  std::vector<double> re(dm.size()), im(dm.size());
  for (std::size_t i = 0; i < dm.size(); ++i) {
    re[i] = dm[i] * r[2 * i];
    im[i] = dm[i] * r[2 * i + 1];
  }
  return GradientField(dim_, omega_[j], std::move(re), std::move(im));
}

ForwardModel ForwardModel::with_data(std::vector<std::vector<double>> data, double noise_level,
                                     std::uint64_t seed) const {
  return ForwardModel(grid_, freqs_, window_sigma_, std::move(data), noise_level, seed);
}

double quadratic_fidelity(std::size_t, std::span<const double> u, std::span<const double> b,
                          std::span<double> grad) {
  double v = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = u[i] - b[i];
    grad[i] = r;
    v += r * r;
  }
  return 0.5 * v;
}

Linearization eta(const ForwardModel& model, const std::vector<std::vector<double>>& u,
                  const FidelityFn& fidelity) {
  if (u.size() != model.grid().size()) throw std::invalid_argument("eta: one measurement vector per time is required");
  Linearization lin;
  lin.fields.reserve(u.size());
  std::vector<double> grad;
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (u[j].size() != model.measurement_size(j))
      throw std::invalid_argument("eta: measurement length mismatch at time " + std::to_string(j));
    grad.assign(u[j].size(), 0.0);
    lin.fidelity += fidelity(j, u[j], model.data()[j], grad);
    lin.fields.push_back(model.field(j, grad));
  }
  return lin;
}

}  // namespace trajfw
