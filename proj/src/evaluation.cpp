#include "trajfw/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace trajfw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::vector<int> assign(const std::vector<double>& cost, std::size_t rows, std::size_t cols) {
  if (cost.size() != rows * cols) throw std::invalid_argument("assign: cost matrix has the wrong size");
  std::vector<int> match(rows, -1);
  if (rows == 0 || cols == 0) return match;

  const bool transpose = rows < cols;
  const std::size_t small = transpose ? rows : cols;
  const std::size_t large = transpose ? cols : rows;
  auto c = [&](std::size_t l, std::size_t s) { return transpose ? cost[s * cols + l] : cost[l * cols + s]; };

  if (small <= 16) {
    // dp over the larger side in order, state = used members of the smaller side
    const std::size_t S = std::size_t{1} << small;
    std::vector<std::vector<double>> dp(large + 1, std::vector<double>(S, kInf));
    std::vector<std::vector<int>> pick(large + 1, std::vector<int>(S, -1));
    dp[0][0] = 0.0;
    for (std::size_t l = 0; l < large; ++l) {
      for (std::size_t mask = 0; mask < S; ++mask) {
        const double base = dp[l][mask];
        if (base == kInf) continue;
        if (base < dp[l + 1][mask]) {
          dp[l + 1][mask] = base;
          pick[l + 1][mask] = -1;
        }
        for (std::size_t s = 0; s < small; ++s) {
          if (mask & (std::size_t{1} << s)) continue;
          const std::size_t nm = mask | (std::size_t{1} << s);
          const double v = base + c(l, s);
          if (v < dp[l + 1][nm]) {
            dp[l + 1][nm] = v;
            pick[l + 1][nm] = static_cast<int>(s);
          }
        }
      }
    }
    std::size_t mask = S - 1;
    for (std::size_t l = large; l > 0; --l) {
      const int s = pick[l][mask];
      if (s < 0) continue;
      mask &= ~(std::size_t{1} << s);
      if (transpose) match[s] = static_cast<int>(l - 1);
      else match[l - 1] = s;
    }
    return match;
  }

  std::vector<char> used_r(rows, 0), used_c(cols, 0);
  for (std::size_t k = 0; k < small; ++k) {
    double best = kInf;
    std::size_t br = 0, bc = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (used_r[r]) continue;
      for (std::size_t q = 0; q < cols; ++q) {
        if (!used_c[q] && cost[r * cols + q] < best) {
          best = cost[r * cols + q];
          br = r;
          bc = q;
        }
      }
    }
    used_r[br] = used_c[bc] = 1;
    match[br] = static_cast<int>(bc);
  }
  return match;
}

KnotPath effective_path(const Atom& a) {
  std::vector<MassPos> knots = a.path.knots();
  for (auto& k : knots) k.mass *= a.weight;
  return KnotPath(a.path.grid_ptr(), std::move(knots));
}

MatchReport match_atoms(const AtomicMeasure& recon, const AtomicMeasure& truth) {
  if (!(recon.grid() == truth.grid())) throw std::invalid_argument("match_atoms: different time grids");
  const std::size_t nt = truth.size(), nr = recon.size();
  std::vector<KnotPath> et, er;
  for (const auto& a : truth.atoms()) et.push_back(effective_path(a));
  for (const auto& a : recon.atoms()) er.push_back(effective_path(a));
  std::vector<double> cost(nt * nr);
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t q = 0; q < nr; ++q) cost[i * nr + q] = path_distance(et[i], er[q]);

  const auto m = assign(cost, nt, nr);
  MatchReport rep;
  std::vector<char> used(nr, 0);
  for (std::size_t i = 0; i < nt; ++i) {
    if (m[i] < 0) {
      rep.unmatched_truth.push_back(i);
      continue;
    }
    const std::size_t q = static_cast<std::size_t>(m[i]);
    used[q] = 1;
    AtomMatch am{i, q, cost[i * nr + q], 0.0, 0.0};
    for (std::size_t j = 0; j < et[i].size(); ++j) {
      am.mass_error = std::max(am.mass_error, std::abs(et[i][j].mass - er[q][j].mass));
      am.position_error = std::max(am.position_error, euclidean_distance(et[i][j].pos, er[q][j].pos));
    }
    rep.matches.push_back(am);
  }
  for (std::size_t q = 0; q < nr; ++q)
    if (!used[q]) rep.unmatched_recon.push_back(q);
  return rep;
}

Slice cluster_slice(const Slice& s, double radius) {
  // single linkage: points chained by gaps of at most radius become one
  // point at their mass-weighted centre
  std::vector<std::size_t> label(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) label[i] = i;
  auto root = [&](std::size_t i) {
    while (label[i] != i) i = label[i] = label[label[i]];
    return i;
  };
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t b = a + 1; b < s.size(); ++b)
      if (euclidean_distance(s[a].pos, s[b].pos) <= radius) label[root(b)] = root(a);

  Slice out;
  std::vector<std::size_t> slot(s.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].weight <= 0.0) continue;
    const std::size_t r = root(i);
    if (slot[r] == s.size()) {
      slot[r] = out.size();
      out.push_back({0.0, Point(s[i].pos.size(), 0.0)});
    }
    auto& c = out[slot[r]];
    c.weight += s[i].weight;
    for (std::size_t d = 0; d < c.pos.size(); ++d) c.pos[d] += s[i].weight * s[i].pos[d];
  }
  for (auto& c : out)
    for (double& x : c.pos) x /= c.weight;
  return out;
}

SliceReport compare_slices(const AtomicMeasure& recon, const AtomicMeasure& truth, double min_mass,
                           double cluster_radius) {
  if (!(recon.grid() == truth.grid())) throw std::invalid_argument("compare_slices: different time grids");
  SliceReport rep;
  for (std::size_t j = 0; j < truth.grid().size(); ++j) {
    const Slice st = time_slice(truth, j);
    const Slice sr = cluster_radius > 0.0 ? cluster_slice(time_slice(recon, j), cluster_radius)
                                          : time_slice(recon, j);
    std::vector<double> cost(st.size() * sr.size());
    for (std::size_t i = 0; i < st.size(); ++i)
      for (std::size_t q = 0; q < sr.size(); ++q)
        cost[i * sr.size() + q] = flat_metric({st[i].weight, st[i].pos}, {sr[q].weight, sr[q].pos});
    const auto m = assign(cost, st.size(), sr.size());

    double pos_err = 0.0, mass_err = 0.0;
    std::vector<char> used(sr.size(), 0);
    for (std::size_t i = 0; i < st.size(); ++i) {
      if (m[i] < 0) {
        mass_err = std::max(mass_err, st[i].weight);
        if (st[i].weight >= min_mass) pos_err = kInf;
        continue;
      }
      const auto& r = sr[m[i]];
      used[m[i]] = 1;
      mass_err = std::max(mass_err, std::abs(st[i].weight - r.weight));
      if (st[i].weight >= min_mass) pos_err = std::max(pos_err, euclidean_distance(st[i].pos, r.pos));
    }
    for (std::size_t q = 0; q < sr.size(); ++q)
      if (!used[q]) mass_err = std::max(mass_err, sr[q].weight);
    rep.position_error.push_back(pos_err);
    rep.mass_error.push_back(mass_err);
    rep.max_position_error = std::max(rep.max_position_error, pos_err);
    rep.max_mass_error = std::max(rep.max_mass_error, mass_err);
  }
  return rep;
}

}  // namespace trajfw
