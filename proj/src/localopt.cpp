#include "trajfw/localopt.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace trajfw {

namespace {

constexpr int kMemory = 10;
constexpr double kArmijo = 1e-4;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Pair {
  std::vector<double> s, y;
  double rho;
};

// Free variables: strictly inside, or on a bound with the gradient pointing inwards.
std::vector<char> free_set(const BoxProblem& p, std::span<const double> x, std::span<const double> g) {
  std::vector<char> f(x.size(), 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= p.lower[i] && g[i] > 0.0) f[i] = 0;
    if (x[i] >= p.upper[i] && g[i] < 0.0) f[i] = 0;
    if (p.lower[i] == p.upper[i]) f[i] = 0;
  }
  return f;
}

std::vector<double> two_loop(const std::deque<Pair>& mem, std::span<const double> g,
                             const std::vector<char>& free) {
  std::vector<double> q(g.begin(), g.end());
  for (std::size_t i = 0; i < q.size(); ++i)
    if (!free[i]) q[i] = 0.0;
  std::vector<double> a(mem.size());
  for (std::size_t m = mem.size(); m-- > 0;) {
    a[m] = mem[m].rho * dot(mem[m].s, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= a[m] * mem[m].y[i];
  }
  if (!mem.empty()) {
    const auto& last = mem.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : q) v *= gamma;
  }
  for (std::size_t m = 0; m < mem.size(); ++m) {
    const double b = mem[m].rho * dot(mem[m].y, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += (a[m] - b) * mem[m].s[i];
  }
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = free[i] ? -q[i] : 0.0;
  return q;
}

}  // namespace

double projected_gradient_norm(const BoxProblem& p, std::span<const double> x,
                               std::span<const double> g) {
  double n = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double step = std::clamp(x[i] - g[i], p.lower[i], p.upper[i]) - x[i];
    n = std::max(n, std::abs(step));
  }
  return n;
}

MinimizeResult minimize(const BoxProblem& p, std::vector<double> x0, int max_iter, double gtol) {
  const std::size_t n = p.dimension();
  if (p.upper.size() != n || x0.size() != n) throw std::invalid_argument("minimize: dimension mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p.lower[i] <= p.upper[i])) throw std::invalid_argument("minimize: lower bound exceeds upper bound");
    x0[i] = std::clamp(x0[i], p.lower[i], p.upper[i]);
  }

  MinimizeResult r;
  r.x = std::move(x0);
  std::vector<double> g(n), gn(n), xn(n);
  r.value = p.objective(r.x, g);
  if (!std::isfinite(r.value)) throw std::domain_error("minimize: objective is not finite at the start point");
  if (n == 0) {
    r.converged = true;
    return r;
  }

  std::deque<Pair> mem;
  for (; r.iterations < max_iter; ++r.iterations) {
    if (projected_gradient_norm(p, r.x, g) <= gtol) {
      r.converged = true;
      break;
    }
    const auto free = free_set(p, r.x, g);
    bool moved = false;
    for (int attempt = 0; attempt < 2 && !moved; ++attempt) {
      std::vector<double> d;
      if (attempt == 0 && !mem.empty()) {
        d = two_loop(mem, g, free);
        if (dot(d, g) >= 0.0) continue;
      } else {
        mem.clear();
        d.resize(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = free[i] ? -g[i] : 0.0;
        // scale the first steepest step so that it moves at most unit length
        double dn = 0.0;
        for (double v : d) dn = std::max(dn, std::abs(v));
        if (dn > 1.0) for (double& v : d) v /= dn;
      }
      double t = 1.0;
      for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
        double decrease = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          xn[i] = std::clamp(r.x[i] + t * d[i], p.lower[i], p.upper[i]);
          decrease += g[i] * (xn[i] - r.x[i]);
        }
        if (decrease >= 0.0) continue;
        const double fn = p.objective(xn, gn);
        if (std::isfinite(fn) && fn <= r.value + kArmijo * decrease) {
          Pair pr{std::vector<double>(n), std::vector<double>(n), 0.0};
          for (std::size_t i = 0; i < n; ++i) {
            pr.s[i] = xn[i] - r.x[i];
            pr.y[i] = gn[i] - g[i];
          }
          const double sy = dot(pr.s, pr.y);
          if (sy > 1e-12 * std::sqrt(dot(pr.s, pr.s) * dot(pr.y, pr.y)) && sy > 0.0) {
            pr.rho = 1.0 / sy;
            mem.push_back(std::move(pr));
            if (mem.size() > kMemory) mem.pop_front();
          }
          r.x.swap(xn);
          g.swap(gn);
          r.value = fn;
          moved = true;
          break;
        }
      }
    }
    if (!moved) break;
  }
  if (!r.converged && projected_gradient_norm(p, r.x, g) <= gtol) r.converged = true;
  return r;
}

}  // namespace trajfw
