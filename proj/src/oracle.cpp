#include "trajfw/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace trajfw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_position(const MeshLayer& L, int d, std::size_t a, std::size_t b) {
  for (int c = 0; c < d; ++c) {
    if (L.positions[a * d + c] != L.positions[b * d + c]) return false;
  }
  return true;
}

// Start offsets of runs of equal positions, terminated by size().
std::vector<std::size_t> position_groups(const MeshLayer& L, int d) {
  std::vector<std::size_t> starts{0};
  for (std::size_t i = 1; i < L.size(); ++i) {
    if (!same_position(L, d, i - 1, i)) starts.push_back(i);
  }
  starts.push_back(L.size());
  return starts;
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (threads <= 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::size_t b = t * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
}

// Uniform-cell spatial hash over source group positions.
class GroupBuckets {
 public:
  GroupBuckets(const std::vector<double>& pos, int d, double cell) : d_(d), cell_(cell) {
    cells_ = static_cast<std::int64_t>(std::ceil(1.0 / cell_)) + 1;
    for (std::size_t g = 0; g * d_ < pos.size(); ++g) map_[key(&pos[g * d_])].push_back(g);
  }

  // Groups in the 3^d neighbourhood of x, ascending.
  void candidates(const double* x, std::vector<std::size_t>& out) const {
    out.clear();
    std::vector<std::int64_t> base(d_), off(d_, -1);
    for (int c = 0; c < d_; ++c) base[c] = coord(x[c]);
    while (true) {
      std::int64_t k = 0;
      bool valid = true;
      for (int c = 0; c < d_; ++c) {
        const std::int64_t v = base[c] + off[c];
        if (v < 0 || v >= cells_) valid = false;
        k = k * cells_ + v;
      }
      if (valid) {
        if (auto it = map_.find(k); it != map_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
      }
      int c = d_ - 1;
      while (c >= 0 && off[c] == 1) off[c--] = -1;
      if (c < 0) break;
      ++off[c];
    }
    std::sort(out.begin(), out.end());
  }

 private:
  std::int64_t coord(double v) const {
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(v / cell_)), 0, cells_ - 1);
  }
  std::int64_t key(const double* x) const {
    std::int64_t k = 0;
    for (int c = 0; c < d_; ++c) k = k * cells_ + coord(x[c]);
    return k;
  }

  int d_;
  double cell_;
  std::int64_t cells_ = 1;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> map_;
};

struct LayerView {
  const MeshLayer* layer;
  std::vector<std::size_t> groups;  // run starts + sentinel
  std::vector<double> group_pos;    // one position per group
  std::size_t group_count() const { return groups.size() - 1; }
};

LayerView view(const MeshLayer& L, int d) {
  LayerView v{&L, position_groups(L, d), {}};
  v.group_pos.reserve(v.group_count() * d);
  for (std::size_t g = 0; g < v.group_count(); ++g)
    for (int c = 0; c < d; ++c) v.group_pos.push_back(L.positions[v.groups[g] * d + c]);
  return v;
}

double dist2(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int c = 0; c < d; ++c) {
    const double t = a[c] - b[c];
    s += t * t;
  }
  return s;
}

struct Relaxation {
  std::vector<double> best;
  std::vector<std::int32_t> pred;
};

// min over source nodes of V[src] + step(src, dst) for every destination node.
Relaxation relax_layer(const LayerView& src, const std::vector<double>& V, const LayerView& dst,
                       int d, double dt, const StepCost& cost, std::optional<double> vmax,
                       int threads) {
  const std::size_t nd = dst.layer->size();
  Relaxation r{std::vector<double>(nd, kInf), std::vector<std::int32_t>(nd, -1)};
  const std::size_t sg = src.group_count();

  std::optional<GroupBuckets> buckets;
  if (vmax) buckets.emplace(src.group_pos, d, std::max(*vmax * dt, 1e-12));

  if (cost.kind == CostKind::BalancedBB) {
    // Masses do not enter the balanced step, so each source group reduces to
    // its cheapest member and every member of a destination group shares the result.
    std::vector<double> gv(sg, kInf);
    std::vector<std::int32_t> ga(sg, -1);
    for (std::size_t g = 0; g < sg; ++g) {
      for (std::size_t i = src.groups[g]; i < src.groups[g + 1]; ++i) {
        if (V[i] < gv[g]) {
          gv[g] = V[i];
          ga[g] = static_cast<std::int32_t>(i);
        }
      }
    }
    const double coef = 0.5 * cost.beta / dt;
    const double base = cost.alpha * dt;
    std::vector<double> sx, sy;
    if (d == 2) {
      sx.resize(sg);
      sy.resize(sg);
      for (std::size_t g = 0; g < sg; ++g) {
        sx[g] = src.group_pos[2 * g];
        sy[g] = src.group_pos[2 * g + 1];
      }
    }
    parallel_for(dst.group_count(), threads, [&](std::size_t gb, std::size_t ge) {
      std::vector<double> scratch(sg);
      std::vector<std::size_t> cand;
      for (std::size_t g = gb; g < ge; ++g) {
        const double* p = &dst.group_pos[g * d];
        double best = kInf;
        std::int32_t arg = -1;
        if (buckets) {
          buckets->candidates(p, cand);
          for (std::size_t s : cand) {
            const double q2 = dist2(p, &src.group_pos[s * d], d);
            if (!within_speed(q2, vmax, dt)) continue;
            const double c = gv[s] + coef * q2;
            if (c < best) {
              best = c;
              arg = ga[s];
            }
          }
        } else if (d == 2) {
          const double px = p[0], py = p[1];
          double* cs = scratch.data();
          const double* vx = sx.data();
          const double* vy = sy.data();
          const double* vv = gv.data();
          for (std::size_t s = 0; s < sg; ++s) {
            const double ex = px - vx[s];
            const double ey = py - vy[s];
            cs[s] = vv[s] + coef * (ex * ex + ey * ey);
          }
          double m = kInf;
          for (std::size_t s = 0; s < sg; ++s) m = cs[s] < m ? cs[s] : m;
          if (m < kInf) {
            std::size_t s = 0;
            while (cs[s] != m) ++s;
            best = m;
            arg = ga[s];
          }
        } else {
          for (std::size_t s = 0; s < sg; ++s) {
            const double c = gv[s] + coef * dist2(p, &src.group_pos[s * d], d);
            if (c < best) {
              best = c;
              arg = ga[s];
            }
          }
        }
        if (arg < 0) continue;
        for (std::size_t i = dst.groups[g]; i < dst.groups[g + 1]; ++i) {
          r.best[i] = best + base;
          r.pred[i] = arg;
        }
      }
    });
    return r;
  }

  // Unbalanced: step = A (h' + h) - C sqrt(h') sqrt(h) cos(theta(x', x)).
  const double C = 4.0 * cost.beta * cost.delta * cost.delta / dt;
  const double A = 0.5 * cost.alpha * dt + 0.5 * C;
  const auto& sm = src.layer->masses;
  const auto& dm = dst.layer->masses;
  std::vector<double> U(V.size()), rt(V.size());
  for (std::size_t i = 0; i < V.size(); ++i) {
    U[i] = V[i] + A * sm[i];
    rt[i] = std::sqrt(sm[i]);
  }
  const double inv2delta = 1.0 / (2.0 * cost.delta);

  parallel_for(dst.group_count(), threads, [&](std::size_t gb, std::size_t ge) {
    std::vector<std::size_t> cand;
    std::vector<double> z;
    for (std::size_t g = gb; g < ge; ++g) {
      const double* p = &dst.group_pos[g * d];
      const std::size_t y0 = dst.groups[g];
      const std::size_t y1 = dst.groups[g + 1];
      z.resize(y1 - y0);

      auto visit = [&](std::size_t s) {
        const double q2 = dist2(p, &src.group_pos[s * d], d);
        if (buckets && !within_speed(q2, vmax, dt)) return;
        const double theta = std::sqrt(q2) * inv2delta;
        const double cs = theta >= std::numbers::pi ? -1.0 : std::cos(theta);
        const std::size_t s0 = src.groups[s];
        const std::size_t s1 = src.groups[s + 1];
        for (std::size_t y = y0; y < y1; ++y) {
          const double zy = C * cs * std::sqrt(dm[y]);
          double best = r.best[y];
          std::int32_t arg = r.pred[y];
          for (std::size_t i = s0; i < s1; ++i) {
            const double c = U[i] - zy * rt[i];
            if (c < best) {
              best = c;
              arg = static_cast<std::int32_t>(i);
            }
          }
          r.best[y] = best;
          r.pred[y] = arg;
        }
      };

      if (buckets) {
        buckets->candidates(p, cand);
        for (std::size_t s : cand) visit(s);
      } else {
        for (std::size_t s = 0; s < sg; ++s) visit(s);
      }
      for (std::size_t y = y0; y < y1; ++y) {
        if (r.pred[y] >= 0) r.best[y] += A * dm[y];
      }
    }
  });
  return r;
}

std::vector<double> node_costs(const LayerView& L, int d, const GradientField& eta) {
  std::vector<double> out(L.layer->size());
  for (std::size_t g = 0; g < L.group_count(); ++g) {
    const double e = eta.value(std::span<const double>(&L.group_pos[g * d], d));
    for (std::size_t i = L.groups[g]; i < L.groups[g + 1]; ++i) out[i] = L.layer->masses[i] * e;
  }
  return out;
}

void validate(const Mesh& mesh, const GridPtr& grid, const std::vector<GradientField>& eta,
              const StepCost& cost, const OracleOptions& opts) {
  if (opts.k < 1) throw std::invalid_argument("oracle: k must be >= 1");
  if (!grid || mesh.layer_count() != grid->size())
    throw std::invalid_argument("oracle: mesh needs one layer per time");
  if (eta.size() != grid->size()) throw std::invalid_argument("oracle: one field per time is required");
  if (opts.vmax && !(*opts.vmax > 0.0)) throw std::invalid_argument("oracle: vmax must be positive");
  cost.validate();
}

OracleResult collect(const Mesh& mesh, const GridPtr& grid, const std::vector<double>& final_values,
                     const std::function<std::vector<std::size_t>(std::size_t)>& trace, int k) {
  std::vector<std::size_t> ends;
  for (std::size_t y = 0; y < final_values.size(); ++y) {
    if (final_values[y] < kInf) ends.push_back(y);
  }
  if (ends.empty()) throw std::runtime_error("oracle: no mesh path satisfies the velocity bound");
  std::stable_sort(ends.begin(), ends.end(),
                   [&](std::size_t a, std::size_t b) { return final_values[a] < final_values[b]; });
  if (ends.size() > static_cast<std::size_t>(k)) ends.resize(k);

  OracleResult out;
  for (std::size_t y : ends) {
    auto idx = trace(y);
    std::vector<MassPos> knots;
    knots.reserve(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) knots.push_back(mesh.node(j, idx[j]));
    out.paths.emplace_back(grid, std::move(knots));
    out.values.push_back(final_values[y]);
    out.nodes.push_back(std::move(idx));
  }
  return out;
}

}  // namespace

MassPos MeshLayer::node(std::size_t i, int dim) const {
  return {masses[i], Point(positions.begin() + i * dim, positions.begin() + (i + 1) * dim)};
}

Mesh::Mesh(int dim, std::vector<MeshLayer> layers) : dim_(dim), layers_(std::move(layers)) {
  if (dim_ < 1) throw std::invalid_argument("Mesh: dimension must be >= 1");
  for (const auto& L : layers_) {
    if (L.size() == 0) throw std::invalid_argument("Mesh: every layer needs at least one node");
    if (L.positions.size() != L.size() * dim_) throw std::invalid_argument("Mesh: position array has the wrong size");
    for (double h : L.masses) {
      if (!(h >= 0.0 && h <= 1.0)) throw std::invalid_argument("Mesh: node masses must lie in [0,1]");
    }
    for (double c : L.positions) {
      if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("Mesh: node positions must lie in the unit box");
    }
  }
}

Mesh Mesh::from_nodes(const std::vector<std::vector<MassPos>>& layers) {
  if (layers.empty() || layers.front().empty()) throw std::invalid_argument("Mesh: empty layer list");
  const int d = static_cast<int>(layers.front().front().pos.size());
  std::vector<MeshLayer> out;
  for (const auto& nodes : layers) {
    MeshLayer L;
    for (const auto& n : nodes) {
      if (static_cast<int>(n.pos.size()) != d) throw std::invalid_argument("Mesh: mixed dimensions");
      L.masses.push_back(n.mass);
      L.positions.insert(L.positions.end(), n.pos.begin(), n.pos.end());
    }
    out.push_back(std::move(L));
  }
  return Mesh(d, std::move(out));
}

double Mesh::edge_count() const {
  double e = 0.0;
  for (std::size_t j = 1; j < layers_.size(); ++j)
    e += static_cast<double>(layers_[j - 1].size()) * static_cast<double>(layers_[j].size());
  return e;
}

Mesh random_mesh(const TimeGrid& grid, int N, int M, std::uint64_t seed) {
  if (N < 1 || M < 0) throw std::invalid_argument("random_mesh: need N >= 1 and M >= 0");
  std::vector<MeshLayer> layers;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(j)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> H;
    if (M == 0) {
      H = {1.0};
    } else {
      for (int i = 0; i < M; ++i) H.push_back(unif(rng));
    }
    MeshLayer L;
    for (int p = 0; p < N * N; ++p) {
      const double x = unif(rng);
      const double y = unif(rng);
      for (double h : H) {
        L.masses.push_back(h);
        L.positions.push_back(x);
        L.positions.push_back(y);
      }
    }
    layers.push_back(std::move(L));
  }
  return Mesh(2, std::move(layers));
}

Mesh uniform_mesh(const TimeGrid& grid, int Ntilde, int M) {
  if (Ntilde < 1 || M < 0) throw std::invalid_argument("uniform_mesh: need Ntilde >= 1 and M >= 0");
  std::vector<double> H;
  if (M == 0) {
    H = {1.0};
  } else {
    for (int i = 0; i <= M; ++i) H.push_back(static_cast<double>(i) / M);
  }
  MeshLayer L;
  for (int a = 0; a <= Ntilde; ++a) {
    for (int b = 0; b <= Ntilde; ++b) {
      for (double h : H) {
        L.masses.push_back(h);
        L.positions.push_back(static_cast<double>(a) / Ntilde);
        L.positions.push_back(static_cast<double>(b) / Ntilde);
      }
    }
  }
  return Mesh(2, std::vector<MeshLayer>(grid.size(), L));
}

bool within_speed(double dist2, std::optional<double> vmax, double dt) {
  if (!vmax) return true;
  const double r = *vmax * dt;
  return dist2 <= r * r;
}

OracleResult dp_shortest_paths(const Mesh& mesh, const GridPtr& grid,
                               const std::vector<GradientField>& eta, const StepCost& cost,
                               const OracleOptions& opts) {
  validate(mesh, grid, eta, cost, opts);
  const int d = mesh.dim();
  const int threads = resolve_threads(opts.threads);
  const std::size_t L = mesh.layer_count();

  std::vector<std::vector<std::int32_t>> pred(L);
  LayerView prev = view(mesh.layer(0), d);
  std::vector<double> V = node_costs(prev, d, eta[0]);
  pred[0].assign(V.size(), -1);

  for (std::size_t J = 1; J < L; ++J) {
    LayerView cur = view(mesh.layer(J), d);
    Relaxation r = relax_layer(prev, V, cur, d, grid->dt(J), cost, opts.vmax, threads);
    const std::vector<double> nc = node_costs(cur, d, eta[J]);
    for (std::size_t y = 0; y < nc.size(); ++y) r.best[y] = r.pred[y] >= 0 ? r.best[y] + nc[y] : kInf;
    V = std::move(r.best);
    pred[J] = std::move(r.pred);
    prev = std::move(cur);
  }

  auto trace = [&](std::size_t y) {
    std::vector<std::size_t> idx(L);
    idx[L - 1] = y;
    for (std::size_t J = L - 1; J > 0; --J) idx[J - 1] = static_cast<std::size_t>(pred[J][idx[J]]);
    return idx;
  };
  return collect(mesh, grid, V, trace, opts.k);
}

OracleResult brute_force_oracle(const Mesh& mesh, const GridPtr& grid,
                                const std::vector<GradientField>& eta, const StepCost& cost,
                                const OracleOptions& opts) {
  validate(mesh, grid, eta, cost, opts);
  const std::size_t L = mesh.layer_count();
  double total = 1.0;
  for (std::size_t j = 0; j < L; ++j) total *= static_cast<double>(mesh.layer(j).size());
  if (total > 1e6) throw std::invalid_argument("brute_force_oracle: instance too large");

  std::vector<std::vector<MassPos>> nodes(L);
  std::vector<std::vector<double>> nc(L);
  for (std::size_t j = 0; j < L; ++j) {
    for (std::size_t i = 0; i < mesh.layer(j).size(); ++i) {
      nodes[j].push_back(mesh.node(j, i));
      nc[j].push_back(nodes[j][i].mass * eta[j].value(nodes[j][i].pos));
    }
  }

  const std::size_t nT = nodes[L - 1].size();
  std::vector<double> best(nT, kInf);
  std::vector<std::vector<std::size_t>> best_idx(nT);
  std::vector<std::size_t> idx(L);

  auto dfs = [&](auto&& self, std::size_t j, double partial) -> void {
    if (j == L) {
      const std::size_t y = idx[L - 1];
      if (partial < best[y]) {
        best[y] = partial;
        best_idx[y] = idx;
      }
      return;
    }
    for (std::size_t i = 0; i < nodes[j].size(); ++i) {
      double c = partial + nc[j][i];
      if (j > 0) {
        const auto& a = nodes[j - 1][idx[j - 1]];
        const auto& b = nodes[j][i];
        double q2 = 0.0;
        for (std::size_t c2 = 0; c2 < a.pos.size(); ++c2) q2 += (a.pos[c2] - b.pos[c2]) * (a.pos[c2] - b.pos[c2]);
        if (!within_speed(q2, opts.vmax, grid->dt(j))) continue;
        c += step(cost, a, b, (*grid)[j - 1], (*grid)[j]);
      }
      idx[j] = i;
      self(self, j + 1, c);
    }
  };
  dfs(dfs, 0, 0.0);

  return collect(mesh, grid, best, [&](std::size_t y) { return best_idx[y]; }, opts.k);
}

std::vector<BenchRow> oracle_bench(const std::vector<BenchCase>& cases, int intervals,
                                   const StepCost& cost, int min_reps, double min_seconds,
                                   int threads) {
  auto grid = make_uniform_grid(intervals);
  const auto freqs = integer_frequencies(3, 2);
  ForwardModel fm(grid, FrequencySet(freqs, Schedule::All, grid->size()), 0.2, {});
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<GradientField> eta;
  for (std::size_t j = 0; j < grid->size(); ++j) {
    std::vector<double> r(fm.measurement_size(j));
    for (double& v : r) v = normal(rng);
    eta.push_back(fm.field(j, r));
  }

  std::vector<BenchRow> rows;
  for (const auto& bc : cases) {
    const Mesh mesh = uniform_mesh(*grid, bc.Ntilde, bc.M);
    OracleOptions opts;
    opts.threads = threads;
    int reps = 0;
    double elapsed = 0.0;
    std::vector<double> samples;
    while (reps < min_reps || elapsed < min_seconds) {
      const auto t0 = std::chrono::steady_clock::now();
      auto res = dp_shortest_paths(mesh, grid, eta, cost, opts);
      const auto t1 = std::chrono::steady_clock::now();
      const double s = std::chrono::duration<double>(t1 - t0).count();
      if (res.values.empty()) throw std::logic_error("oracle_bench: empty result");
      samples.push_back(s);
      elapsed += s;
      ++reps;
    }
    std::sort(samples.begin(), samples.end());
    BenchRow row;
    row.label = "Ntilde=" + std::to_string(bc.Ntilde) + ";M=" + std::to_string(bc.M);
    row.intervals = intervals;
    row.nodes_per_layer = mesh.layer(0).size();
    row.edges = mesh.edge_count();
    row.ms = 1e3 * samples[samples.size() / 2];
    rows.push_back(row);
  }
  return rows;
}

}  // namespace trajfw
