#pragma once

#include <functional>
#include <span>
#include <vector>

namespace trajfw {

/// Smooth objective on a box; the callable returns the value and writes the gradient.
struct BoxProblem {
  std::vector<double> lower;
  std::vector<double> upper;
  std::function<double(std::span<const double> x, std::span<double> grad)> objective;

  std::size_t dimension() const { return lower.size(); }
};

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;  // projected gradient below gtol
};

/// Projected limited-memory BFGS (memory 10) with backtracking Armijo search.
/// Never returns a point worse than x0.
MinimizeResult minimize(const BoxProblem& p, std::vector<double> x0, int max_iter = 200,
                        double gtol = 1e-8);

/// Infinity norm of P(x - g) - x.
double projected_gradient_norm(const BoxProblem& p, std::span<const double> x,
                               std::span<const double> g);

}  // namespace trajfw
