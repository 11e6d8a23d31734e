#include "trajfw/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace trajfw {

namespace {

double unit_mass(double) { return 1.0; }

// Trajectories shared by the balanced and unbalanced variants.
Point diagonal_up(double t) { return {0.2 + 0.6 * t, 0.2 + 0.6 * t}; }
Point diagonal_down(double t) { return {0.8 - 0.6 * t, 0.2 + 0.6 * t}; }

// Three crossing curves inside [0.1,0.9]^2 for the second phantom.
Point arc_right(double t) { return {0.1 + 0.8 * t, 0.3 + 0.4 * t * t}; }
Point line_left(double t) { return {0.9 - 0.8 * t, 0.2 + 0.6 * t}; }
Point kinked(double t) {
  if (t < 0.5) return {0.5, 0.9 - 0.8 * t};
  return {0.5 + 0.6 * (t - 0.5), 0.5 - 0.6 * (t - 0.5)};
}

}  // namespace

Phantom make_phantom(const std::string& name) {
  Phantom ph;
  ph.name = name;
  if (name == "balanced1") {
    ph.atoms = {{1.0, {unit_mass, diagonal_up}}, {1.0, {unit_mass, diagonal_down}}};
  } else if (name == "unbalanced1") {
    ph.balanced = false;
    ph.atoms = {{1.0, {[](double t) { return 0.5 * (1.0 + 3.0 * t * t); }, diagonal_up}},
                {1.0, {[](double t) { return 1.5 * std::sqrt(std::max(1.0 - t, 0.0)); }, diagonal_down}}};
  } else if (name == "balanced2") {
    ph.atoms = {{1.0, {unit_mass, arc_right}}, {1.0, {unit_mass, line_left}}, {1.0, {unit_mass, kinked}}};
  } else if (name == "unbalanced2") {
    ph.balanced = false;
    // each mass profile integrates to 1 with sup norm at most 2
    ph.atoms = {
        {1.0, {[](double t) { return 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * t); }, arc_right}},
        {1.0, {[](double t) { return 2.0 * t; }, line_left}},
        {1.0, {[](double t) { return 0.5 * std::numbers::pi * std::sin(std::numbers::pi * t); }, kinked}}};
  } else {
    throw std::invalid_argument("unknown phantom '" + name + "'");
  }
  return ph;
}

ModelTemplate ModelTemplate::standard(int intervals, int K, double window_sigma, Schedule schedule) {
  return {make_uniform_grid(intervals), integer_frequencies(K, 2), schedule, window_sigma};
}

AtomicMeasure ground_truth(const Phantom& ph, const GridPtr& grid) {
  AtomicMeasure m(grid);
  for (const auto& atom : ph.atoms) {
    KnotPath raw = sample_phantom_path(atom.path, grid);
    double peak = 0.0;
    for (const auto& k : raw.knots()) peak = std::max(peak, k.mass);
    const double scale = peak > 1.0 ? peak : 1.0;
    if (scale == 1.0) {
      m.add(atom.weight, std::move(raw));
      continue;
    }
    std::vector<MassPos> knots = raw.knots();
    for (auto& k : knots) k.mass = std::min(k.mass / scale, 1.0);
    m.add(atom.weight * scale, KnotPath(grid, std::move(knots)));
  }
  return m;
}

ForwardModel synthesize_data(const Phantom& ph, const ModelTemplate& tmpl, double noise_level,
                             std::uint64_t seed) {
  if (!(noise_level >= 0.0)) throw std::invalid_argument("synthesize_data: noise_level must be >= 0");
  FrequencySet freqs(tmpl.frequencies, tmpl.schedule, tmpl.grid->size());
  ForwardModel blank(tmpl.grid, freqs, tmpl.window_sigma, {}, noise_level, seed);
  auto data = measurements(ground_truth(ph, tmpl.grid), blank);

  if (noise_level > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> noise(data.size());
    double clean2 = 0.0;
    double noise2 = 0.0;
    for (std::size_t j = 0; j < data.size(); ++j) {
      noise[j].resize(data[j].size());
      for (std::size_t i = 0; i < data[j].size(); ++i) {
        noise[j][i] = normal(rng);
        noise2 += noise[j][i] * noise[j][i];
        clean2 += data[j][i] * data[j][i];
      }
    }
    const double scale = noise2 > 0.0 ? noise_level * std::sqrt(clean2 / noise2) : 0.0;
    for (std::size_t j = 0; j < data.size(); ++j)
      for (std::size_t i = 0; i < data[j].size(); ++i) data[j][i] += scale * noise[j][i];
  }
  return blank.with_data(std::move(data), noise_level, seed);
}

}  // namespace trajfw
