#include <cmath>

#include "doctest.h"
#include "trajfw/measures.hpp"
#include "trajfw/phantoms.hpp"

using namespace trajfw;

namespace {

// Simpson's rule after t = 1 - u^2, which removes square-root behaviour at t = 1.
double mass_integral(const std::function<double(double)>& h, int n = 4000) {
  auto f = [&](double u) { return h(1.0 - u * u) * 2.0 * u; };
  const double step = 1.0 / n;
  double s = f(0.0) + f(1.0);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * step);
  return s * step / 3.0;
}

double norm2(const std::vector<std::vector<double>>& v) {
  double s = 0.0;
  for (const auto& r : v)
    for (double x : r) s += x * x;
  return s;
}

}  // namespace

TEST_CASE("phantom catalogue") {
  for (const std::string name : {"balanced1", "balanced2", "unbalanced1", "unbalanced2"}) {
    const auto ph = make_phantom(name);
    CHECK(ph.name == name);
    CHECK(ph.balanced == (name.rfind("balanced", 0) == 0));
    for (const auto& atom : ph.atoms) {
      CHECK(atom.weight >= 0.0);
      for (int i = 0; i <= 1000; ++i) {
        const double t = i / 1000.0;
        const double h = atom.path.mass_fn(t);
        if (ph.balanced) CHECK(h == 1.0);
        CHECK(h >= 0.0);
        CHECK(h <= 2.0);
        for (double c : atom.path.pos_fn(t)) {
          CHECK(c >= 0.0);
          CHECK(c <= 1.0);
        }
      }
      if (!ph.balanced) CHECK(mass_integral(atom.path.mass_fn) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  CHECK(make_phantom("balanced1").atoms.size() == 2);
  CHECK(make_phantom("balanced2").atoms.size() == 3);
  CHECK_THROWS_AS(make_phantom("phantom3"), std::invalid_argument);
}

TEST_CASE("unbalanced phantom one mass profiles") {
  const auto ph = make_phantom("unbalanced1");
  CHECK(ph.atoms[0].path.mass_fn(1.0) == doctest::Approx(2.0));
  CHECK(ph.atoms[0].path.mass_fn(0.0) == doctest::Approx(0.5));
  CHECK(ph.atoms[1].path.mass_fn(1.0) == 0.0);
  CHECK(mass_integral(ph.atoms[1].path.mass_fn) == doctest::Approx(1.0).epsilon(1e-12));
  const auto mid = ph.atoms[0].path.pos_fn(0.5);
  CHECK(mid[0] == doctest::Approx(0.5));
  CHECK(mid[1] == doctest::Approx(0.5));
}

TEST_CASE("ground truth keeps knot masses in the unit interval") {
  auto grid = make_uniform_grid(21);
  const auto m = ground_truth(make_phantom("unbalanced1"), grid);
  REQUIRE(m.size() == 2);
  CHECK(m.atoms()[0].weight == doctest::Approx(2.0));
  CHECK(m.atoms()[1].weight == doctest::Approx(1.5));
  for (const auto& a : m.atoms())
    for (const auto& k : a.path.knots()) CHECK(k.mass <= 1.0);
  // effective mass is unchanged by the normalisation
  CHECK(time_slice(m, 21)[0].weight == doctest::Approx(2.0));
  CHECK(time_slice(m, 0)[1].weight == doctest::Approx(1.5));
}

TEST_CASE("synthesised data") {
  const auto ph = make_phantom("balanced1");
  const auto tmpl = ModelTemplate::standard(21);
  CHECK(tmpl.grid->size() == 22);
  CHECK(tmpl.frequencies.size() == 25);

  const auto clean = synthesize_data(ph, tmpl, 0.0, 1);
  const auto truth = ground_truth(ph, tmpl.grid);
  CHECK(energy(truth, clean, StepCost::balanced(0.5, 0.5)).fidelity == 0.0);

  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const auto noisy = synthesize_data(ph, tmpl, 0.2, seed);
    std::vector<std::vector<double>> diff = noisy.data();
    for (std::size_t j = 0; j < diff.size(); ++j)
      for (std::size_t i = 0; i < diff[j].size(); ++i) diff[j][i] -= clean.data()[j][i];
    CHECK(std::sqrt(norm2(diff) / norm2(clean.data())) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(noisy.noise_level() == 0.2);
    CHECK(noisy.seed() == seed);
    CHECK(synthesize_data(ph, tmpl, 0.2, seed).data() == noisy.data());
  }
  CHECK(synthesize_data(ph, tmpl, 0.2, 1).data() != synthesize_data(ph, tmpl, 0.2, 2).data());
  CHECK_THROWS_AS(synthesize_data(ph, tmpl, -0.1, 1), std::invalid_argument);
}
