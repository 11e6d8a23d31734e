#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "trajfw/localopt.hpp"

using namespace trajfw;

namespace {

BoxProblem quadratic(std::vector<double> c, std::vector<double> lo, std::vector<double> hi) {
  BoxProblem p;
  p.lower = std::move(lo);
  p.upper = std::move(hi);
  p.objective = [c](std::span<const double> x, std::span<double> g) {
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      g[i] = x[i] - c[i];
      v += 0.5 * g[i] * g[i];
    }
    return v;
  };
  return p;
}

}  // namespace

TEST_CASE("interior quadratic") {
  auto p = quadratic({0.3, 0.7, 0.1}, {0, 0, 0}, {1, 1, 1});
  auto r = minimize(p, {0.9, 0.1, 0.5});
  CHECK(r.converged);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(r.x[i] - std::vector<double>{0.3, 0.7, 0.1}[i]) <= 1e-8);
}

TEST_CASE("quadratic with its centre outside the box") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> c(5), lo(5, 0.0), hi(5, 1.0), x0(5);
    for (std::size_t i = 0; i < 5; ++i) {
      c[i] = testing::uniform(rng, -1, 2);
      x0[i] = testing::uniform(rng);
    }
    auto r = minimize(quadratic(c, lo, hi), x0);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(r.x[i] - std::clamp(c[i], 0.0, 1.0)) <= 1e-8);
  }
}

TEST_CASE("stationary start stays put") {
  auto p = quadratic({0.5, 0.5}, {0, 0}, {1, 1});
  auto r = minimize(p, {0.5, 0.5});
  CHECK(r.converged);
  CHECK(r.x == std::vector<double>{0.5, 0.5});
  // a corner minimiser with the gradient pushing outward is stationary too
  auto q = quadratic({2.0, -1.0}, {0, 0}, {1, 1});
  auto rq = minimize(q, {1.0, 0.0});
  CHECK(rq.x == std::vector<double>{1.0, 0.0});
}

TEST_CASE("rosenbrock on a box") {
  BoxProblem p;
  p.lower = {-2, -2};
  p.upper = {2, 2};
  p.objective = [](std::span<const double> x, std::span<double> g) {
    const double a = 1 - x[0], b = x[1] - x[0] * x[0];
    g[0] = -2 * a - 400 * x[0] * b;
    g[1] = 200 * b;
    return a * a + 100 * b * b;
  };
  auto r = minimize(p, {-1.2, 1.0}, 2000, 1e-10);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("never worse than the start and iterates stay in the box") {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 30; ++trial) {
    const double a = testing::uniform(rng, 1, 5), b = testing::uniform(rng, -3, 3);
    BoxProblem p;
    p.lower = {0, 0, 0};
    p.upper = {1, 1, 1};
    bool inside = true;
    p.objective = [&](std::span<const double> x, std::span<double> g) {
      double v = 0.0;
      for (std::size_t i = 0; i < 3; ++i) {
        if (x[i] < 0.0 || x[i] > 1.0) inside = false;
        v += std::sin(a * x[i] + b) + 0.1 * x[i] * x[i];
        g[i] = a * std::cos(a * x[i] + b) + 0.2 * x[i];
      }
      return v;
    };
    std::vector<double> x0 = {testing::uniform(rng), testing::uniform(rng), testing::uniform(rng)};
    std::vector<double> g(3);
    const double f0 = p.objective(x0, g);
    auto r = minimize(p, x0, 50);
    CHECK(r.value <= f0);
    CHECK(inside);
    std::vector<double> gr(3);
    CHECK(p.objective(r.x, gr) == r.value);
  }
}

TEST_CASE("projected gradient norm and errors") {
  auto p = quadratic({2.0, 0.5}, {0, 0}, {1, 1});
  std::vector<double> x = {1.0, 0.2}, g = {-1.0, -0.3};
  CHECK(projected_gradient_norm(p, x, g) == doctest::Approx(0.3));

  BoxProblem bad;
  bad.lower = {0};
  bad.upper = {1};
  bad.objective = [](std::span<const double>, std::span<double> g) {
    g[0] = 0;
    return std::nan("");
  };
  CHECK_THROWS_AS(minimize(bad, {0.5}), std::domain_error);
}
