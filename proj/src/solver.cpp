#include "trajfw/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "trajfw/localopt.hpp"

namespace trajfw {

namespace {

// Energy increase tolerated when a step is exact descent in exact arithmetic.
constexpr double kRoundingSlack = 1e-12;

constexpr double kMassHeadroom = 0.25;

// Rescales every atom so that its largest knot mass equals peak, keeping a*h.
AtomicMeasure rescale_masses(const AtomicMeasure& m, double peak) {
  AtomicMeasure out(m.grid_ptr());
  for (const auto& a : m.atoms()) {
    double hmax = 0.0;
    for (const auto& k : a.path.knots()) hmax = std::max(hmax, k.mass);
    if (hmax <= 0.0) {
      out.add(a.weight, a.path);
      continue;
    }
    const double f = peak / hmax;
    std::vector<MassPos> knots = a.path.knots();
    for (auto& k : knots) k.mass = std::min(k.mass * f, 1.0);
    out.add(a.weight / f, KnotPath(m.grid_ptr(), std::move(knots)));
  }
  return out;
}

std::size_t knot_width(int dim, bool balanced) { return static_cast<std::size_t>(dim) + (balanced ? 0 : 1); }

double quad_value(const Eigen::MatrixXd& G, const Eigen::VectorXd& c, const Eigen::VectorXd& a) {
  return 0.5 * a.dot(G * a) - c.dot(a);
}

// min 0.5 a'Ga - c'a subject to a >= 0, by Lawson-Hanson style active sets.
Eigen::VectorXd nonnegative_qp(const Eigen::MatrixXd& G, const Eigen::VectorXd& c) {
  const Eigen::Index n = c.size();
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
  std::vector<char> in(n, 0);
  const double tol = 1e-13 * (1.0 + c.cwiseAbs().maxCoeff());

  auto solve_free = [&]() {
    std::vector<Eigen::Index> P;
    for (Eigen::Index i = 0; i < n; ++i)
      if (in[i]) P.push_back(i);
    Eigen::MatrixXd Gp(P.size(), P.size());
    Eigen::VectorXd cp(P.size());
    for (std::size_t r = 0; r < P.size(); ++r) {
      cp[r] = c[P[r]];
      for (std::size_t s = 0; s < P.size(); ++s) Gp(r, s) = G(P[r], P[s]);
    }
    Eigen::VectorXd zp = Gp.completeOrthogonalDecomposition().solve(cp);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (std::size_t r = 0; r < P.size(); ++r) z[P[r]] = zp[r];
    return z;
  };

  for (int outer = 0; outer < 3 * n + 10; ++outer) {
    const Eigen::VectorXd w = c - G * a;
    Eigen::Index j = -1;
    double best = tol;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!in[i] && w[i] > best) {
        best = w[i];
        j = i;
      }
    }
    if (j < 0) break;
    in[j] = 1;
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      const Eigen::VectorXd z = solve_free();
      bool positive = true;
      for (Eigen::Index i = 0; i < n; ++i)
        if (in[i] && z[i] <= 0.0) positive = false;
      if (positive) {
        a = z;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (in[i] && z[i] <= 0.0) alpha = std::min(alpha, a[i] / (a[i] - z[i]));
      }
      a += alpha * (z - a);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (in[i] && a[i] <= 1e-15) {
          in[i] = 0;
          a[i] = 0.0;
        }
      }
    }
  }
  return a.cwiseMax(0.0);
}

// Euclidean projection onto {a >= 0, sum a <= cap}.
Eigen::VectorXd project_capped(const Eigen::VectorXd& v, double cap) {
  Eigen::VectorXd a = v.cwiseMax(0.0);
  if (a.sum() <= cap) return a;
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    const double t = (cum - cap) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) tau = t;
  }
  return (v.array() - tau).cwiseMax(0.0).matrix();
}

Eigen::VectorXd capped_qp(const Eigen::MatrixXd& G, const Eigen::VectorXd& c, double cap,
                          Eigen::VectorXd a) {
  const double L = std::max(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G).eigenvalues().maxCoeff(), 1e-300);
  a = project_capped(a, cap);
  for (int it = 0; it < 20000; ++it) {
    Eigen::VectorXd next = project_capped(a - (G * a - c) / L, cap);
    const double change = (next - a).cwiseAbs().maxCoeff();
    a = std::move(next);
    if (change <= 1e-15 * (1.0 + a.cwiseAbs().maxCoeff())) break;
  }
  return a;
}

std::vector<double> stacked(const std::vector<std::vector<double>>& u) {
  std::vector<double> out;
  for (const auto& v : u) out.insert(out.end(), v.begin(), v.end());
  return out;
}

std::uint64_t iteration_seed(std::uint64_t seed, int n) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(n + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::string stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::UniformConverged: return "uniform_converged";
    case StopReason::MaxIters: return "max_iters";
    case StopReason::GapBelow: return "gap_below";
  }
  return "unknown";
}

StopReason parse_stop_reason(const std::string& name) {
  if (name == "uniform_converged") return StopReason::UniformConverged;
  if (name == "max_iters") return StopReason::MaxIters;
  if (name == "gap_below") return StopReason::GapBelow;
  throw std::invalid_argument("unknown stop reason '" + name + "'");
}

void SolverConfig::validate() const {
  cost.validate();
  std::visit(
      [](const auto& s) {
        if (s.k < 1) throw std::invalid_argument("solver: k must be >= 1");
        if (s.N < 1) throw std::invalid_argument("solver: N must be >= 1");
        if (s.M < 0) throw std::invalid_argument("solver: M must be >= 0");
      },
      mesh);
  if (!(phi0 > 0.0)) throw std::invalid_argument("solver: phi0 must be positive");
  if (max_iters < 0) throw std::invalid_argument("solver: max_iters must be >= 0");
  if (initial_Ntilde < 1) throw std::invalid_argument("solver: initial_Ntilde must be >= 1");
  if (vmax && !(*vmax > 0.0)) throw std::invalid_argument("solver: vmax must be positive");
  if (dedup_tol < 0.0 || slide_gtol < 0.0 || stall_rtol < 0.0 || insert_tol < 0.0)
    throw std::invalid_argument("solver: tolerances must be nonnegative");
}

Linearization linearize(const AtomicMeasure& m, const ForwardModel& fm) {
  return eta(fm, measurements(m, fm));
}

double linearized_energy(const KnotPath& path, const Linearization& lin, const StepCost& cost) {
  double v = path_cost(cost, path);
  for (std::size_t j = 0; j < path.size(); ++j) v += path[j].mass * lin.fields[j].value(path[j].pos);
  return v;
}

std::vector<double> pack_knots(const AtomicMeasure& m, bool balanced) {
  std::vector<double> v;
  for (const auto& a : m.atoms()) {
    for (const auto& k : a.path.knots()) {
      if (!balanced) v.push_back(std::sqrt(k.mass));
      v.insert(v.end(), k.pos.begin(), k.pos.end());
    }
  }
  return v;
}

AtomicMeasure unpack_knots(const AtomicMeasure& shape, std::span<const double> v, bool balanced) {
  AtomicMeasure out(shape.grid_ptr());
  std::size_t o = 0;
  for (const auto& a : shape.atoms()) {
    std::vector<MassPos> knots;
    for (const auto& k : a.path.knots()) {
      MassPos q;
      if (balanced) {
        q.mass = k.mass;
      } else {
        const double s = std::clamp(v[o++], 0.0, 1.0);
        q.mass = s * s;
      }
      for (std::size_t c = 0; c < k.pos.size(); ++c) q.pos.push_back(std::clamp(v[o++], 0.0, 1.0));
      knots.push_back(std::move(q));
    }
    out.add(a.weight, KnotPath(shape.grid_ptr(), std::move(knots)));
  }
  if (o != v.size()) throw std::invalid_argument("unpack_knots: variable count does not match the shape");
  return out;
}

double linearized_objective(const KnotPath& shape, std::span<const double> v, const Linearization& lin,
                            const StepCost& cost, std::span<double> grad) {
  const bool bal = cost.balanced_kind();
  const int d = shape.dim();
  const std::size_t w = knot_width(d, bal);
  if (v.size() != w * shape.size()) throw std::invalid_argument("linearized_objective: wrong variable count");
  const bool want = !grad.empty();
  if (want) std::fill(grad.begin(), grad.end(), 0.0);
  const auto& grid = shape.grid();
  std::vector<double> g(d);
  double f = 0.0;
  auto s_of = [&](std::size_t j) { return bal ? std::sqrt(shape[j].mass) : v[j * w]; };
  auto x_of = [&](std::size_t j) { return v.subspan(j * w + (bal ? 0 : 1), d); };

  for (std::size_t j = 0; j < shape.size(); ++j) {
    const double s = s_of(j);
    const double e = want ? lin.fields[j].gradient(x_of(j), g) : lin.fields[j].value(x_of(j));
    f += s * s * e;
    if (want) {
      if (!bal) grad[j * w] += 2.0 * s * e;
      for (int c = 0; c < d; ++c) grad[j * w + (bal ? 0 : 1) + c] += s * s * g[c];
    }
  }
  for (std::size_t j = 1; j < shape.size(); ++j) {
    double* gs0 = want && !bal ? &grad[(j - 1) * w] : nullptr;
    double* gs1 = want && !bal ? &grad[j * w] : nullptr;
    std::span<double> gx0 = want ? grad.subspan((j - 1) * w + (bal ? 0 : 1), d) : std::span<double>{};
    std::span<double> gx1 = want ? grad.subspan(j * w + (bal ? 0 : 1), d) : std::span<double>{};
    f += step_sqrt_mass(cost, s_of(j - 1), x_of(j - 1), s_of(j), x_of(j), grid.dt(j), 1.0, gs0, gx0, gs1, gx1);
  }
  return f;
}

double exact_objective(const AtomicMeasure& shape, std::span<const double> v, const ForwardModel& fm,
                       const StepCost& cost, std::span<double> grad) {
  const bool bal = cost.balanced_kind();
  const std::size_t T1 = shape.grid().size();
  if (shape.empty()) {
    double f = 0.0;
    for (const auto& b : fm.data())
      for (double x : b) f += 0.5 * x * x;
    return f;
  }
  const int d = shape.atoms().front().path.dim();
  const std::size_t w = knot_width(d, bal);
  const std::size_t per_atom = w * T1;
  if (v.size() != per_atom * shape.size()) throw std::invalid_argument("exact_objective: wrong variable count");
  const bool want = !grad.empty();
  if (want) std::fill(grad.begin(), grad.end(), 0.0);

  auto base = [&](std::size_t i, std::size_t j) { return i * per_atom + j * w; };
  auto s_of = [&](std::size_t i, std::size_t j) {
    return bal ? std::sqrt(shape.atoms()[i].path[j].mass) : v[base(i, j)];
  };
  auto x_of = [&](std::size_t i, std::size_t j) { return v.subspan(base(i, j) + (bal ? 0 : 1), d); };

  double f = 0.0;
  std::vector<double> g(d);
  for (std::size_t j = 0; j < T1; ++j) {
    std::vector<double> r(fm.measurement_size(j), 0.0);
    for (std::size_t i = 0; i < shape.size(); ++i) {
      const double s = s_of(i, j);
      fm.accumulate(j, shape.atoms()[i].weight * s * s, x_of(i, j), r);
    }
    for (std::size_t q = 0; q < r.size(); ++q) {
      r[q] -= fm.data()[j][q];
      f += 0.5 * r[q] * r[q];
    }
    if (!want) continue;
    const GradientField field = fm.field(j, r);
    for (std::size_t i = 0; i < shape.size(); ++i) {
      const double a = shape.atoms()[i].weight;
      const double s = s_of(i, j);
      const double e = field.gradient(x_of(i, j), g);
      if (!bal) grad[base(i, j)] += 2.0 * a * s * e;
      for (int c = 0; c < d; ++c) grad[base(i, j) + (bal ? 0 : 1) + c] += a * s * s * g[c];
    }
  }
  const auto& grid = shape.grid();
  for (std::size_t i = 0; i < shape.size(); ++i) {
    const double a = shape.atoms()[i].weight;
    for (std::size_t j = 1; j < T1; ++j) {
      double* gs0 = want && !bal ? &grad[base(i, j - 1)] : nullptr;
      double* gs1 = want && !bal ? &grad[base(i, j)] : nullptr;
      std::span<double> gx0 = want ? grad.subspan(base(i, j - 1) + (bal ? 0 : 1), d) : std::span<double>{};
      std::span<double> gx1 = want ? grad.subspan(base(i, j) + (bal ? 0 : 1), d) : std::span<double>{};
      f += a * step_sqrt_mass(cost, s_of(i, j - 1), x_of(i, j - 1), s_of(i, j), x_of(i, j), grid.dt(j), a,
                              gs0, gx0, gs1, gx1);
    }
  }
  return f;
}

KnotPath slide_linearized(const KnotPath& candidate, const Linearization& lin, const StepCost& cost,
                          int max_iter, double gtol) {
  const bool bal = cost.balanced_kind();
  AtomicMeasure shape(candidate.grid_ptr());
  shape.add(1.0, candidate);
  auto x0 = pack_knots(shape, bal);
  BoxProblem p{std::vector<double>(x0.size(), 0.0), std::vector<double>(x0.size(), 1.0),
               [&](std::span<const double> x, std::span<double> g) {
                 return linearized_objective(candidate, x, lin, cost, g);
               }};
  const double f0 = linearized_objective(candidate, x0, lin, cost, {});
  auto res = minimize(p, x0, max_iter, gtol);
  if (!(res.value < f0)) return candidate;
  return unpack_knots(shape, res.x, bal).atoms().front().path;
}

SegmentQuadratic segment_quadratic(const AtomicMeasure& m, double weight, const KnotPath& path,
                                   const ForwardModel& fm, const StepCost& cost) {
  AtomicMeasure mu(m.grid_ptr());
  mu.add(weight, path);
  const auto u = measurements(m, fm);
  const auto v = measurements(mu, fm);
  SegmentQuadratic q;
  for (std::size_t j = 0; j < u.size(); ++j) {
    for (std::size_t i = 0; i < u[j].size(); ++i) {
      const double dv = v[j][i] - u[j][i];
      q.slope += (fm.data()[j][i] - u[j][i]) * dv;
      q.curvature += dv * dv;
    }
  }
  double wm = 0.0;
  for (const auto& a : m.atoms()) wm += a.weight * path_cost(cost, a.path);
  q.slope -= weight * path_cost(cost, path) - wm;
  return q;
}

double line_search(const AtomicMeasure& m, double weight, const KnotPath& path, const ForwardModel& fm,
                   const StepCost& cost) {
  const SegmentQuadratic q = segment_quadratic(m, weight, path, fm, cost);
  if (q.curvature <= 0.0) return q.slope > 0.0 ? 1.0 : 0.0;
  return std::clamp(q.slope / q.curvature, 0.0, 1.0);
}

AtomicMeasure optimize_weights(const AtomicMeasure& m, const ForwardModel& fm, const StepCost& cost,
                               double phi0) {
  const std::size_t n = m.size();
  if (n == 0) return m;
  std::vector<std::vector<double>> cols;
  for (const auto& a : m.atoms()) {
    AtomicMeasure one(m.grid_ptr());
    one.add(1.0, a.path);
    cols.push_back(stacked(measurements(one, fm)));
  }
  const auto b = stacked(fm.data());
  Eigen::MatrixXd V(b.size(), n);
  for (std::size_t i = 0; i < n; ++i) V.col(i) = Eigen::Map<const Eigen::VectorXd>(cols[i].data(), b.size());
  const Eigen::Map<const Eigen::VectorXd> bv(b.data(), b.size());
  const Eigen::MatrixXd G = V.transpose() * V;
  Eigen::VectorXd c = V.transpose() * bv;
  Eigen::VectorXd current(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] -= path_cost(cost, m.atoms()[i].path);
    current[i] = m.atoms()[i].weight;
  }

  const double cap = 1.0 / phi0;
  Eigen::VectorXd a = nonnegative_qp(G, c);
  if (a.sum() > cap) a = capped_qp(G, c, cap, current);
  if (quad_value(G, c, a) > quad_value(G, c, current)) return m;

  AtomicMeasure out(m.grid_ptr());
  for (std::size_t i = 0; i < n; ++i) out.add(a[i], m.atoms()[i].path);
  return out;
}

AtomicMeasure slide_exact(const AtomicMeasure& m, const ForwardModel& fm, const StepCost& cost,
                          const SlideOptions& opts) {
  if (m.empty()) return m;
  const bool bal = cost.balanced_kind();
  const double e0 = energy(m, fm, cost).total;

  // Exact duplicates would feel weight-scaled gradients and drift apart.
  const AtomicMeasure start = consolidate(m, 0.0);
  // E depends on weight and mass only through a*h, so masses can be shrunk
  // to leave room below the box bound while sliding.
  const AtomicMeasure shape = bal ? start : rescale_masses(start, kMassHeadroom);
  auto x0 = pack_knots(shape, bal);
  BoxProblem p{std::vector<double>(x0.size(), 0.0), std::vector<double>(x0.size(), 1.0),
               [&](std::span<const double> x, std::span<double> g) { return exact_objective(shape, x, fm, cost, g); }};
  const auto res = minimize(p, x0, opts.max_iter, opts.gtol);
  AtomicMeasure moved = unpack_knots(shape, res.x, bal);
  if (!bal) moved = rescale_masses(moved, 1.0);
  AtomicMeasure best = consolidate(optimize_weights(moved, fm, cost, opts.phi0), 0.0);
  double eb = energy(best, fm, cost).total;

  // Near-duplicate atoms leave the weight problem badly conditioned; merge
  // them (and drop negligible weights) and solve for the weights again.
  double wmax = 0.0;
  for (const auto& a : best.atoms()) wmax = std::max(wmax, a.weight);
  AtomicMeasure pruned(best.grid_ptr());
  for (const auto& a : best.atoms())
    if (a.weight > 1e-10 * wmax) pruned.add(a.weight, a.path);
  AtomicMeasure merged = optimize_weights(consolidate(pruned, opts.dedup_tol), fm, cost, opts.phi0);
  merged = consolidate(merged, 0.0);
  if (merged.size() < best.size()) {
    const double em = energy(merged, fm, cost).total;
    if (em <= eb + kRoundingSlack) {
      best = std::move(merged);
      eb = em;
    }
  }
  if (!(eb <= e0 + kRoundingSlack) || opts.phi0 * best.total_weight() > 1.0 + 1e-12) return m;
  return best;
}

double dual_gap(const AtomicMeasure& m, const Linearization& lin, double oracle_value,
                const StepCost& cost, double phi0) {
  double g = 0.0;
  for (const auto& a : m.atoms()) g += a.weight * linearized_energy(a.path, lin, cost);
  return g - std::min(oracle_value, 0.0) / phi0;
}

SolveResult solve(const SolverConfig& cfg, const ForwardModel& fm) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();
  };

  const bool uniform = std::holds_alternative<UniformStrategy>(cfg.mesh);
  int k = 1, N = 1, M = 0;
  std::uint64_t seed = 0;
  std::visit([&](const auto& s) { k = s.k; N = s.N; M = s.M; }, cfg.mesh);
  if (!uniform) seed = std::get<RandomStrategy>(cfg.mesh).seed;
  if (cfg.cost.balanced_kind()) M = 0;
  int Ntilde = std::min(cfg.initial_Ntilde, N);

  SolveResult out{AtomicMeasure(fm.grid_ptr()), {}, StopReason::MaxIters,
                  std::numeric_limits<double>::quiet_NaN()};
  AtomicMeasure& m = out.measure;
  EnergyReport rep = energy(m, fm, cfg.cost);

  auto push = [&](int iter, double gap) {
    IterationRecord r{iter, rep.total, rep.fidelity, rep.regulariser, gap, m.size(), uniform ? Ntilde : N,
                      elapsed_ms()};
    out.records.push_back(r);
    if (cfg.on_iteration) cfg.on_iteration(r);
  };
  push(0, std::numeric_limits<double>::quiet_NaN());

  const SlideOptions slide{cfg.phi0, cfg.slide_max_iter, cfg.slide_gtol, cfg.dedup_tol};
  OracleOptions oopts{k, cfg.vmax, cfg.threads};

  for (int n = 1; n <= cfg.max_iters; ++n) {
    const Linearization lin = linearize(m, fm);
    const Mesh mesh = uniform ? uniform_mesh(fm.grid(), Ntilde, M)
                              : random_mesh(fm.grid(), N, M, iteration_seed(seed, n));
    const OracleResult oracle = dp_shortest_paths(mesh, fm.grid_ptr(), lin.fields, cfg.cost, oopts);
    const double gap = dual_gap(m, lin, oracle.values.front(), cfg.cost, cfg.phi0);
    out.final_gap = gap;
    const int mesh_used = Ntilde;

    if (cfg.gap_tol && gap <= *cfg.gap_tol) {
      push(n, gap);
      out.reason = StopReason::GapBelow;
      return out;
    }

    std::vector<std::pair<double, KnotPath>> cands;
    for (const auto& p : oracle.paths) {
      KnotPath slid = slide_linearized(p, lin, cfg.cost, cfg.slide_max_iter, cfg.slide_gtol);
      cands.emplace_back(linearized_energy(slid, lin, cfg.cost), std::move(slid));
    }
    std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    const double e_before = rep.total;
    bool inserted = false;
    for (const auto& [value, path] : cands) {
      const SegmentQuadratic q = segment_quadratic(m, 1.0 / cfg.phi0, path, fm, cfg.cost);
      if (!(q.slope > cfg.insert_tol)) continue;
      const double lambda = q.curvature > 0.0 ? std::clamp(q.slope / q.curvature, 0.0, 1.0) : 1.0;
      AtomicMeasure next = m.scaled(1.0 - lambda);
      next.add(lambda / cfg.phi0, path);
      const EnergyReport nrep = energy(next, fm, cfg.cost);
      // E is exactly quadratic along the segment, so lambda > 0 is a descent
      // step; only guard against rounding beyond a few ulps.
      if (nrep.total <= rep.total + kRoundingSlack) {
        m = std::move(next);
        rep = nrep;
        inserted = true;
      }
    }

    m = slide_exact(m, fm, cfg.cost, slide);
    rep = energy(m, fm, cfg.cost);
    Ntilde = mesh_used;
    push(n, gap);

    const double rel = (e_before - rep.total) / std::max(std::abs(e_before), 1e-300);
    if (uniform && !inserted && rel <= cfg.stall_rtol) {
      if (2 * Ntilde > N) {
        out.reason = StopReason::UniformConverged;
        return out;
      }
      Ntilde *= 2;
    }
  }
  out.reason = StopReason::MaxIters;
  return out;
}

}  // namespace trajfw
