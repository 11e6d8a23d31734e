#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "trajfw/forward.hpp"

using namespace trajfw;

namespace {

ForwardModel blank_model(int T, int K, double sigma = 0.2, Schedule s = Schedule::All) {
  auto grid = make_uniform_grid(T);
  return ForwardModel(grid, FrequencySet(integer_frequencies(K, 2), s, grid->size()), sigma, {});
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = testing::uniform(rng, -1, 1);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("integer frequencies") {
  const auto ks = integer_frequencies(3, 2);
  CHECK(ks.size() == 25);  // (7*7 + 1) / 2, zero included
  CHECK(ks.front() == Point{0, 0});
  CHECK(ks.back() == Point{3, 3});
  // no frequency appears together with its negative
  for (std::size_t a = 0; a < ks.size(); ++a)
    for (std::size_t b = a + 1; b < ks.size(); ++b) CHECK_FALSE((ks[a][0] == -ks[b][0] && ks[a][1] == -ks[b][1]));
}

TEST_CASE("rotating schedule keeps a fixed count per time") {
  FrequencySet f(integer_frequencies(3, 2), Schedule::Rotate, 10);
  for (std::size_t j = 0; j < 10; ++j) CHECK(f.at(j).size() == 13);
  CHECK(f.at(0) != f.at(5));
  CHECK(parse_schedule("rotate") == Schedule::Rotate);
  CHECK(schedule_name(Schedule::All) == "all");
  CHECK_THROWS(parse_schedule("sometimes"));
}

TEST_CASE("apply examples") {
  auto fm = blank_model(0, 2);
  CHECK(fm.apply(0, {}) == std::vector<double>(fm.measurement_size(0), 0.0));

  auto zero_only = ForwardModel(make_grid({0.5}), FrequencySet({{0, 0}}, Schedule::All, 1), 0.3, {});
  auto u = zero_only.apply(0, {{1.0, {0.37, 0.81}}});
  CHECK(u[0] == doctest::Approx(1.0));
  CHECK(u[1] == doctest::Approx(0.0));

  const double sigma = 0.25;
  auto k10 = ForwardModel(make_grid({0.5}), FrequencySet({{1, 0}}, Schedule::All, 1), sigma, {});
  auto pair = k10.apply(0, {{1.0, {0.0, 0.0}}, {1.0, {0.5, 0.0}}});
  CHECK(std::abs(pair[0]) <= 1e-15);
  const auto single = k10.apply(0, {{1.0, {0.0, 0.0}}});
  CHECK(single[0] == doctest::Approx(std::exp(-sigma * sigma / 2)));
}

TEST_CASE("apply is linear and adjoint to the field") {
  std::mt19937_64 rng(21);
  auto fm = blank_model(3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    Slice a, b;
    for (int i = 0; i < 3; ++i) a.push_back({testing::uniform(rng), testing::random_point(rng)});
    for (int i = 0; i < 2; ++i) b.push_back({testing::uniform(rng), testing::random_point(rng)});
    Slice ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const auto ua = fm.apply(1, a), ub = fm.apply(1, b), uab = fm.apply(1, ab);
    for (std::size_t i = 0; i < uab.size(); ++i) CHECK(std::abs(uab[i] - ua[i] - ub[i]) <= 1e-12);

    const Point x = testing::random_point(rng);
    const auto r = random_vector(rng, fm.measurement_size(2));
    const double lhs = dot(fm.apply(2, {{1.0, x}}), r);
    CHECK(std::abs(lhs - fm.field(2, r).value(x)) <= 1e-10);
  }
}

TEST_CASE("fidelity is quadratic along segments") {
  std::mt19937_64 rng(23);
  auto fm = blank_model(0, 3);
  auto data = fm.with_data({random_vector(rng, fm.measurement_size(0))}, 0.0, 0);
  const Slice s0 = {{0.7, {0.2, 0.3}}, {0.4, {0.8, 0.1}}};
  const Slice s1 = {{1.1, {0.5, 0.6}}};
  auto F = [&](double lam) {
    Slice s;
    for (auto p : s0) s.push_back({(1 - lam) * p.weight, p.pos});
    for (auto p : s1) s.push_back({lam * p.weight, p.pos});
    auto u = data.apply(0, s);
    std::vector<double> g(u.size());
    return quadratic_fidelity(0, u, data.data()[0], g);
  };
  const double h = 0.1;
  const double second0 = F(0) - 2 * F(h) + F(2 * h);
  for (double lam = 0.1; lam < 0.9; lam += 0.1)
    CHECK(std::abs((F(lam) - 2 * F(lam + h) + F(lam + 2 * h)) - second0) <= 1e-8);
}

TEST_CASE("eta at the data and at zero") {
  std::mt19937_64 rng(29);
  auto fm = blank_model(2, 2);
  std::vector<std::vector<double>> b;
  for (std::size_t j = 0; j < 3; ++j) b.push_back(random_vector(rng, fm.measurement_size(j)));
  auto data = fm.with_data(b, 0.0, 0);

  auto exact = eta(data, b);
  CHECK(exact.fidelity == 0.0);
  for (int trial = 0; trial < 10; ++trial) CHECK(exact.fields[1].value(testing::random_point(rng)) == 0.0);

  std::vector<std::vector<double>> zero;
  double half_norm = 0.0;
  for (const auto& bj : b) {
    zero.emplace_back(bj.size(), 0.0);
    half_norm += 0.5 * dot(bj, bj);
  }
  auto at_zero = eta(data, zero);
  CHECK(at_zero.fidelity == doctest::Approx(half_norm).epsilon(1e-14));
  for (int trial = 0; trial < 10; ++trial) {
    const Point x = testing::random_point(rng);
    const double expected = -dot(b[2], data.apply(2, {{1.0, x}}));
    CHECK(at_zero.fields[2].value(x) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("field gradient") {
  const double sigma = 0.2;
  auto k10 = ForwardModel(make_grid({0.5}), FrequencySet({{1, 0}}, Schedule::All, 1), sigma, {});
  const double r1 = 0.7;
  auto f = k10.field(0, std::vector<double>{r1, 0.0});
  const Point x{0.13, 0.42};
  const auto g = eta_gradient(f, x);
  const double damping = std::exp(-sigma * sigma / 2);
  CHECK(g[0] == doctest::Approx(-2 * std::numbers::pi * r1 * std::sin(2 * std::numbers::pi * x[0]) * damping));
  CHECK(g[1] == 0.0);

  auto k00 = ForwardModel(make_grid({0.5}), FrequencySet({{0, 0}}, Schedule::All, 1), sigma, {});
  const auto g0 = eta_gradient(k00.field(0, std::vector<double>{1.3, 0.4}), x);
  CHECK(g0[0] == 0.0);
  CHECK(g0[1] == 0.0);

  std::mt19937_64 rng(31);
  auto fm = blank_model(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    auto field = fm.field(0, random_vector(rng, fm.measurement_size(0)));
    const Point p = testing::random_point(rng);
    const auto fd = testing::central_difference([&](std::span<const double> z) { return field.value(z); }, p);
    const auto an = eta_gradient(field, p);
    for (int c = 0; c < 2; ++c) CHECK(std::abs(an[c] - fd[c]) <= 1e-6);
  }
}

TEST_CASE("model validation") {
  auto grid = make_uniform_grid(2);
  FrequencySet f(integer_frequencies(1, 2), Schedule::All, 3);
  CHECK_THROWS_AS(ForwardModel(grid, f, -0.1, {}), std::invalid_argument);
  CHECK_THROWS_AS(ForwardModel(grid, FrequencySet(integer_frequencies(1, 2), Schedule::All, 2), 0.2, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ForwardModel(grid, f, 0.2, {{1.0}, {1.0}, {1.0}}), std::invalid_argument);
}
