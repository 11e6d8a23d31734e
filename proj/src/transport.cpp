#include "trajfw/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace trajfw {

StepCost StepCost::balanced(double alpha, double beta) {
  StepCost c{CostKind::BalancedBB, alpha, beta, 0.1};
  c.validate();
  return c;
}

StepCost StepCost::unbalanced(double alpha, double beta, double delta) {
  StepCost c{CostKind::UnbalancedWFR, alpha, beta, delta};
  c.validate();
  return c;
}

void StepCost::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("StepCost: alpha and beta must be positive");
  if (kind == CostKind::UnbalancedWFR && !(delta > 0.0))
    throw std::invalid_argument("StepCost: delta must be positive for the unbalanced cost");
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = b[i] - a[i];
    s += d * d;
  }
  return s;
}

// sin(t)/t, accurate near zero.
double sinc(double t) {
  if (std::abs(t) < 1e-4) return 1.0 - t * t / 6.0;
  return std::sin(t) / t;
}

}  // namespace

double step_sqrt_mass(const StepCost& cost, double s0, std::span<const double> x0, double s1,
                      std::span<const double> x1, double dt, double scale, double* g_s0,
                      std::span<double> g_x0, double* g_s1, std::span<double> g_x1) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: t1 must exceed t0");
  const double d2 = squared_distance(x0, x1);
  if (cost.kind == CostKind::BalancedBB) {
    const double c = cost.beta / dt;
    if (!g_x0.empty() || !g_x1.empty()) {
      for (std::size_t i = 0; i < x0.size(); ++i) {
        const double g = scale * c * (x1[i] - x0[i]);
        if (!g_x0.empty()) g_x0[i] -= g;
        if (!g_x1.empty()) g_x1[i] += g;
      }
    }
    return cost.alpha * dt + 0.5 * c * d2;
  }

  const double c = 4.0 * cost.beta * cost.delta * cost.delta / dt;
  const double a = cost.alpha * dt;
  const double dist = std::sqrt(d2);
  const double theta_raw = dist / (2.0 * cost.delta);
  const bool clamped = theta_raw >= std::numbers::pi;
  const double theta = clamped ? std::numbers::pi : theta_raw;
  const double cs = clamped ? -1.0 : std::cos(theta);
  const double sq = 0.5 * (s0 * s0 + s1 * s1);

  if (g_s0) *g_s0 += scale * (a * s0 + c * (s0 - s1 * cs));
  if (g_s1) *g_s1 += scale * (a * s1 + c * (s1 - s0 * cs));
  if (!clamped && (!g_x0.empty() || !g_x1.empty())) {
    // d theta / d x1 = dx / (2 delta |dx|), and sin(theta)/|dx| = sinc(theta)/(2 delta).
    const double k = scale * c * s0 * s1 * sinc(theta) / (4.0 * cost.delta * cost.delta);
    for (std::size_t i = 0; i < x0.size(); ++i) {
      const double g = k * (x1[i] - x0[i]);
      if (!g_x0.empty()) g_x0[i] -= g;
      if (!g_x1.empty()) g_x1[i] += g;
    }
  }
  return a * sq + c * (sq - s0 * s1 * cs);
}

double step(const StepCost& cost, const MassPos& a, const MassPos& b, double t0, double t1) {
  if (!(t1 > t0)) throw std::invalid_argument("step: t1 must exceed t0");
  if (a.mass < 0.0 || b.mass < 0.0) throw std::invalid_argument("step: masses must be nonnegative");
  return step_sqrt_mass(cost, std::sqrt(a.mass), a.pos, std::sqrt(b.mass), b.pos, t1 - t0);
}

double path_cost(const StepCost& cost, const KnotPath& path) {
  double w = 0.0;
  const auto& g = path.grid();
  for (std::size_t j = 1; j < path.size(); ++j) w += step(cost, path[j - 1], path[j], g[j - 1], g[j]);
  return w;
}

MassPos TabulatedPath::at(double t) const {
  if (samples.empty()) throw std::logic_error("TabulatedPath: empty table");
  if (t <= times.front()) return samples.front();
  if (t >= times.back()) return samples.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
  MassPos out;
  out.mass = (1.0 - w) * samples[i - 1].mass + w * samples[i].mass;
  out.pos.resize(samples[i].pos.size());
  for (std::size_t c = 0; c < out.pos.size(); ++c)
    out.pos[c] = (1.0 - w) * samples[i - 1].pos[c] + w * samples[i].pos[c];
  return out;
}

ContinuousPath TabulatedPath::as_continuous() const {
  auto table = std::make_shared<const TabulatedPath>(*this);
  return {[table](double t) { return table->at(t).mass; },
          [table](double t) { return table->at(t).pos; }};
}

namespace {

MassPos interpolate_balanced(const MassPos& a, const MassPos& b, double s) {
  MassPos out{a.mass, a.pos};
  for (std::size_t i = 0; i < out.pos.size(); ++i) out.pos[i] = (1.0 - s) * a.pos[i] + s * b.pos[i];
  return out;
}

MassPos interpolate_cone(const MassPos& a, const MassPos& b, double s, double delta) {
  const double r0 = std::sqrt(a.mass);
  const double r1 = std::sqrt(b.mass);
  const double dist = euclidean_distance(a.pos, b.pos);
  const double theta = std::min(dist / (2.0 * delta), std::numbers::pi);
  if (r0 == 0.0 && r1 == 0.0) return {0.0, a.pos};

  // The geodesic is the straight chord between (r0, 0) and (r1, theta) in the
  // planar cone embedding; mass is the squared radius, the angle gives the
  // fraction of the segment travelled.
  const double px = (1.0 - s) * r0 + s * r1 * std::cos(theta);
  const double py = s * r1 * std::sin(theta);
  MassPos out;
  out.mass = (1.0 - s) * (1.0 - s) * r0 * r0 + s * s * r1 * r1 +
             2.0 * s * (1.0 - s) * r0 * r1 * std::cos(theta);
  out.mass = std::max(out.mass, 0.0);
  double frac = s;
  if (theta > 0.0) frac = std::clamp(std::atan2(py, px) / theta, 0.0, 1.0);
  out.pos.resize(a.pos.size());
  for (std::size_t i = 0; i < out.pos.size(); ++i)
    out.pos[i] = std::clamp(a.pos[i] + frac * (b.pos[i] - a.pos[i]), 0.0, 1.0);
  return out;
}

}  // namespace

TabulatedPath geodesic_interpolate(const StepCost& cost, const KnotPath& path,
                                   int samples_per_interval) {
  if (samples_per_interval < 1) throw std::invalid_argument("geodesic_interpolate: samples_per_interval must be >= 1");
  const auto& g = path.grid();
  TabulatedPath out;
  for (std::size_t j = 1; j < path.size(); ++j) {
    for (int i = 0; i < samples_per_interval; ++i) {
      const double s = static_cast<double>(i) / samples_per_interval;
      out.times.push_back(g[j - 1] + s * g.dt(j));
      if (i == 0) {
        out.samples.push_back(path[j - 1]);
      } else if (cost.balanced_kind()) {
        out.samples.push_back(interpolate_balanced(path[j - 1], path[j], s));
      } else {
        out.samples.push_back(interpolate_cone(path[j - 1], path[j], s, cost.delta));
      }
    }
  }
  out.times.push_back(g[path.size() - 1]);
  out.samples.push_back(path[path.size() - 1]);
  return out;
}

}  // namespace trajfw
