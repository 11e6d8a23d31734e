#pragma once

// Shared helpers for the unit tests: seeded random inputs and small numeric
// oracles that are independent of the library code.

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "trajfw/measures.hpp"
#include "trajfw/paths.hpp"

namespace testing {

using trajfw::MassPos;
using trajfw::Point;

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Point random_point(std::mt19937_64& rng, int dim = 2, double lo = 0.0, double hi = 1.0) {
  Point x(dim);
  for (auto& c : x) c = uniform(rng, lo, hi);
  return x;
}

inline trajfw::KnotPath random_path(std::mt19937_64& rng, const trajfw::GridPtr& grid,
                                    bool unit_mass = false, double lo = 0.05, double hi = 0.95) {
  std::vector<MassPos> knots;
  for (std::size_t j = 0; j < grid->size(); ++j)
    knots.push_back({unit_mass ? 1.0 : uniform(rng, 0.1, 1.0), random_point(rng, 2, lo, hi)});
  return {grid, std::move(knots)};
}

inline trajfw::AtomicMeasure random_measure(std::mt19937_64& rng, const trajfw::GridPtr& grid,
                                            int atoms, bool unit_mass = false) {
  trajfw::AtomicMeasure m(grid);
  for (int i = 0; i < atoms; ++i) m.add(uniform(rng, 0.2, 1.5), random_path(rng, grid, unit_mass));
  return m;
}

/// Central differences of f at x with step h, one coordinate at a time.
inline std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                              std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double fp = f(x);
    x[i] = xi - h;
    const double fm = f(x);
    x[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// |a - b|_inf / max(|b|_inf, floor): the relative error used by the gradient checks.
inline double relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-3) {
  double num = 0.0, den = floor;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

/// Golden-section minimisation of a unimodal function on [lo, hi].
inline double golden_section(const std::function<double(double)>& f, double lo, double hi,
                             double tol = 1e-11) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - r * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + r * (b - a); fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  // the endpoints compete too, the minimiser may sit on the boundary
  double best = mid, fb = f(mid);
  if (f(lo) < fb) { best = lo; fb = f(lo); }
  if (f(hi) < fb) best = hi;
  return best;
}

}  // namespace testing
