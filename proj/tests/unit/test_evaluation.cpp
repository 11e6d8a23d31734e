#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "trajfw/evaluation.hpp"
#include "trajfw/phantoms.hpp"

using namespace trajfw;

namespace {

// Minimum total cost over all injective row->column maps, by permutation.
double brute_assignment(const std::vector<double>& c, std::size_t rows, std::size_t cols) {
  const std::size_t small = std::min(rows, cols);
  std::vector<std::size_t> big_idx(std::max(rows, cols));
  std::iota(big_idx.begin(), big_idx.end(), 0);
  double best = 1e300;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < small; ++i)
      s += rows <= cols ? c[i * cols + big_idx[i]] : c[big_idx[i] * cols + i];
    best = std::min(best, s);
  } while (std::next_permutation(big_idx.begin(), big_idx.end()));
  return best;
}

double matched_cost(const std::vector<double>& c, std::size_t cols, const std::vector<int>& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] >= 0) s += c[i * cols + m[i]];
  return s;
}

}  // namespace

TEST_CASE("assignment is optimal on small problems") {
  std::mt19937_64 rng(127);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + trial % 5, cols = 1 + (trial / 5) % 5;
    std::vector<double> c(rows * cols);
    for (auto& x : c) x = testing::uniform(rng);
    const auto m = assign(c, rows, cols);
    REQUIRE(m.size() == rows);
    std::vector<int> used;
    for (int x : m)
      if (x >= 0) used.push_back(x);
    CHECK(used.size() == std::min(rows, cols));
    std::sort(used.begin(), used.end());
    CHECK(std::adjacent_find(used.begin(), used.end()) == used.end());
    CHECK(std::abs(matched_cost(c, cols, m) - brute_assignment(c, rows, cols)) <= 1e-12);
  }
}

TEST_CASE("matching the truth with itself") {
  auto grid = make_uniform_grid(21);
  const auto truth = ground_truth(make_phantom("unbalanced1"), grid);
  const auto rep = match_atoms(truth, truth);
  REQUIRE(rep.matches.size() == 2);
  for (const auto& m : rep.matches) {
    CHECK(m.truth == m.recon);
    CHECK(m.distance == 0.0);
    CHECK(m.mass_error == 0.0);
    CHECK(m.position_error == 0.0);
  }
  const auto sl = compare_slices(truth, truth);
  CHECK(sl.max_mass_error == 0.0);
  CHECK(sl.max_position_error == 0.0);
}

TEST_CASE("matching is invariant under permutation") {
  std::mt19937_64 rng(131);
  auto grid = make_uniform_grid(4);
  for (int trial = 0; trial < 30; ++trial) {
    const auto truth = testing::random_measure(rng, grid, 1 + trial % 4);
    const auto recon = testing::random_measure(rng, grid, 1 + (trial / 4) % 4);
    std::vector<Atom> shuffled(recon.atoms());
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const AtomicMeasure perm(grid, shuffled);
    const auto a = match_atoms(recon, truth), b = match_atoms(perm, truth);
    REQUIRE(a.matches.size() == b.matches.size());
    double da = 0.0, db = 0.0;
    for (const auto& m : a.matches) da += m.distance;
    for (const auto& m : b.matches) db += m.distance;
    CHECK(std::abs(da - db) <= 1e-12);
    CHECK(a.unmatched_truth.size() == b.unmatched_truth.size());
    CHECK(a.unmatched_recon.size() == b.unmatched_recon.size());

    // the matching is a minimum-distance one
    std::vector<double> cost(truth.size() * recon.size());
    for (std::size_t i = 0; i < truth.size(); ++i)
      for (std::size_t q = 0; q < recon.size(); ++q)
        cost[i * recon.size() + q] =
            path_distance(effective_path(truth.atoms()[i]), effective_path(recon.atoms()[q]));
    CHECK(std::abs(da - brute_assignment(cost, truth.size(), recon.size())) <= 1e-12);
  }
}

TEST_CASE("effective path carries the weight") {
  auto grid = make_uniform_grid(1);
  const Atom a{2.5, KnotPath(grid, {{0.4, {0.1, 0.1}}, {0.8, {0.2, 0.2}}})};
  const auto e = effective_path(a);
  CHECK(e[0].mass == doctest::Approx(1.0));
  CHECK(e[1].mass == doctest::Approx(2.0));
}

TEST_CASE("slice comparison") {
  auto grid = make_uniform_grid(1);
  const AtomicMeasure truth(grid, {{1.0, KnotPath(grid, {{1, {0.2, 0.2}}, {1, {0.8, 0.8}}})},
                                   {1.0, KnotPath(grid, {{0.1, {0.8, 0.2}}, {1, {0.2, 0.8}}})}});
  // atoms swap identity halfway through: per-slice comparison does not care
  const AtomicMeasure swapped(grid, {{1.0, KnotPath(grid, {{1, {0.21, 0.2}}, {1, {0.2, 0.8}}})},
                                     {1.0, KnotPath(grid, {{0.1, {0.8, 0.2}}, {1, {0.8, 0.8}}})}});
  const auto sl = compare_slices(swapped, truth);
  CHECK(sl.max_position_error == doctest::Approx(0.01));
  CHECK(sl.max_mass_error == doctest::Approx(0.0));

  // light true points are excluded from the position error
  const AtomicMeasure off(grid, {{1.0, KnotPath(grid, {{1, {0.2, 0.2}}, {1, {0.8, 0.8}}})},
                                 {1.0, KnotPath(grid, {{0.1, {0.5, 0.5}}, {1, {0.2, 0.8}}})}});
  CHECK(compare_slices(off, truth, 0.0).max_position_error == doctest::Approx(std::hypot(0.3, 0.3)));
  CHECK(compare_slices(off, truth, 0.5).max_position_error == 0.0);

  // a point split in two counts as unmatched mass unless clustered
  const AtomicMeasure split(grid, {{0.5, KnotPath(grid, {{1, {0.2, 0.2}}, {1, {0.8, 0.8}}})},
                                   {0.5, KnotPath(grid, {{1, {0.2, 0.21}}, {1, {0.8, 0.8}}})},
                                   {1.0, KnotPath(grid, {{0.1, {0.8, 0.2}}, {1, {0.2, 0.8}}})}});
  CHECK(compare_slices(split, truth).max_mass_error == doctest::Approx(0.5));
  const auto clustered = compare_slices(split, truth, 0.0, 0.02);
  CHECK(clustered.max_mass_error == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(clustered.max_position_error == doctest::Approx(0.005));
}

TEST_CASE("clustering a slice") {
  const Slice s = {{1.0, {0.0, 0.0}}, {1.0, {0.01, 0.0}}, {2.0, {0.02, 0.0}}, {1.0, {0.5, 0.5}}, {0.0, {0.9, 0.9}}};
  const auto c = cluster_slice(s, 0.011);
  REQUIRE(c.size() == 2);
  CHECK(c[0].weight == 4.0);
  CHECK(c[0].pos[0] == doctest::Approx(0.0125));
  CHECK(c[1].weight == 1.0);
  CHECK(cluster_slice(s, 0.005).size() == 4);
}
