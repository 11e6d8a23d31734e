#pragma once

#include <span>
#include <vector>

#include "trajfw/paths.hpp"

namespace trajfw {

enum class CostKind { BalancedBB, UnbalancedWFR };

/// Per-interval transport cost. Balanced: alpha*dt + (beta/2)|dx|^2/dt.
/// Unbalanced: alpha*dt*(h0+h1)/2 plus the closed-form zero-alpha
/// Wasserstein-Fisher-Rao cost with length scale delta.
struct StepCost {
  CostKind kind = CostKind::BalancedBB;
  double alpha = 0.5;
  double beta = 0.5;
  double delta = 0.1;

  static StepCost balanced(double alpha, double beta);
  static StepCost unbalanced(double alpha, double beta, double delta);

  void validate() const;
  bool balanced_kind() const { return kind == CostKind::BalancedBB; }
};

double step(const StepCost& cost, const MassPos& a, const MassPos& b, double t0, double t1);

/// Step cost written in square-root-mass coordinates s = sqrt(h), which makes
/// the unbalanced cost C^1. When the gradient spans are non-empty, the partial
/// derivatives times `scale` are added into them (mass partials are ignored for
/// the balanced cost).
double step_sqrt_mass(const StepCost& cost, double s0, std::span<const double> x0, double s1,
                      std::span<const double> x1, double dt, double scale = 1.0,
                      double* g_s0 = nullptr, std::span<double> g_x0 = {},
                      double* g_s1 = nullptr, std::span<double> g_x1 = {});

/// Sum of step costs along the path.
double path_cost(const StepCost& cost, const KnotPath& path);

/// Dense samples of the cost-minimising interpolation between consecutive knots.
struct TabulatedPath {
  std::vector<double> times;
  std::vector<MassPos> samples;

  /// Piecewise-linear lookup in the table.
  MassPos at(double t) const;
  ContinuousPath as_continuous() const;
};

/// Balanced: straight segments at constant mass. Unbalanced: cone geodesics,
/// r(s)^2 = (1-s)^2 r0^2 + s^2 r1^2 + 2 s (1-s) r0 r1 cos(theta) with r = sqrt(h)
/// and the position moving along the segment with an arctan-type speed profile.
TabulatedPath geodesic_interpolate(const StepCost& cost, const KnotPath& path,
                                   int samples_per_interval);

}  // namespace trajfw
