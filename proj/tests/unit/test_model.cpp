#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "common.hpp"
#include "mbcs/model.hpp"

using namespace mbcs;
using boost::math::quadrature::gauss_kronrod;

namespace {

// (2 pi)^{-d/2} int V(x) e^{-ik.x} dx as a radial integral, segment by segment.
double fourier_oracle(const RadialPotential& pot, int d, double k) {
  const double pi = std::numbers::pi;
  auto radial = [&](double r) {
    const double v = pot.real_space(r);
    switch (d) {
      case 1:
        return 2.0 * v * std::cos(k * r);
      case 2:
        return 2.0 * pi * r * v * std::cyl_bessel_j(0.0, k * r);
      default:
        return 4.0 * pi * r * r * v * (k * r < 1e-8 ? 1.0 : std::sin(k * r) / (k * r));
    }
  };
  double sum = 0.0;
  const double h = 0.25 * pot.range;
  for (int i = 0; i < 240; ++i) sum += gauss_kronrod<double, 31>::integrate(radial, i * h, (i + 1) * h, 8, 1e-14);
  return std::pow(2.0 * pi, -0.5 * d) * sum;
}

}  // namespace

TEST_CASE("build_model: reference single band") {
  const auto m = test::one_band(3);
  CHECK(m.n_bands() == 1);
  CHECK(m.bands[0].fermi_momentum() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.interactions(0, 0).family == PotentialFamily::gaussian);
}

TEST_CASE("build_model: one-sided pair is symmetrized") {
  ModelConfig c;
  c.bands = {{0.5, 1.0}, {0.7, 0.8}};
  c.interactions = {{0, 0, "gaussian", -1.0, 1.0}, {0, 1, "exponential", -0.3, 0.5}};
  const auto m = build_model(c);
  CHECK(m.interactions(1, 0) == m.interactions(0, 1));
  CHECK(m.interactions(1, 0).family == PotentialFamily::exponential);
  CHECK(m.interactions(1, 1).is_zero());
}

TEST_CASE("build_model: validation errors") {
  ModelConfig c;
  c.bands = {{0.5, 1.0}, {0.5, -1.0}};
  try {
    build_model(c);
    FAIL("negative mu accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("band 2") != std::string::npos);
  }
  c.bands = {{0.5, 1.0}};
  c.dimension = 4;
  CHECK_THROWS_AS(build_model(c), ConfigError);
  c.dimension = 3;
  c.bands = {{0.0, 1.0}};
  CHECK_THROWS_AS(build_model(c), ConfigError);
  c.bands = {{0.5, 1.0}};
  c.interactions = {{0, 0, "yukawa", -1.0, 1.0}};
  CHECK_THROWS_AS(build_model(c), ConfigError);
  c.bands = {{0.5, 1.0}, {0.5, 1.0}};
  c.interactions = {{0, 1, "gaussian", -1.0, 1.0}, {1, 0, "gaussian", -0.5, 1.0}};
  CHECK_THROWS_AS(build_model(c), ConfigError);
}

TEST_CASE("dispersion_eval") {
  CHECK(dispersion_eval({0.5, 1.0}, 1.0) == 0.0);
  CHECK(dispersion_eval({0.5, 1.0}, 2.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(dispersion_eval({2.0, 0.5}, 0.0) == -0.5);
  for (const BandDispersion b : {BandDispersion{0.5, 1.0}, BandDispersion{0.3, 2.7}, BandDispersion{1.7, 0.11}})
    CHECK(dispersion_eval(b, b.fermi_momentum()) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("potential_fourier: closed forms against radial quadrature") {
  for (int d = 1; d <= 3; ++d) {
    const RadialPotential g{PotentialFamily::gaussian, -1.3, 0.8};
    CHECK(test::rel(potential_fourier(g, d, 0.0), -1.3 * std::pow(0.8, d)) < 1e-15);
    CHECK(test::rel(fourier_oracle(g, d, 0.0), potential_fourier(g, d, 0.0)) < 1e-10);
    for (const auto fam : {PotentialFamily::gaussian, PotentialFamily::exponential}) {
      const RadialPotential pot{fam, 0.7, 1.3};
      const double scale = std::abs(potential_fourier(pot, d, 0.0));
      for (double k = 0.0; k <= 10.0 / pot.range; k += 0.37) {
        const double closed = potential_fourier(pot, d, k);
        const double oracle = fourier_oracle(pot, d, k);
        CAPTURE(d);
        CAPTURE(k);
        // relative, or absolute against V^(0) once the transform has decayed
        CHECK(std::abs(closed - oracle) <= 1e-8 * std::max(std::abs(oracle), 1e-4 * scale));
      }
    }
  }
  const RadialPotential g{PotentialFamily::gaussian, -1.0, 1.0};
  CHECK(test::rel(fourier_oracle(g, 3, 2.0), -std::exp(-2.0)) < 1e-10);
  CHECK(test::rel(potential_fourier(g, 3, 2.0), -std::exp(-2.0)) < 1e-15);
  const RadialPotential zero{PotentialFamily::exponential, 0.0, 1.0};
  for (double k : {0.0, 0.5, 3.0}) CHECK(potential_fourier(zero, 2, k) == 0.0);
}

TEST_CASE("scaled_model: kappa = 0 removes inter-band potentials") {
  const auto m = test::reference_model("two_band");
  const auto s = scaled_model(m, 0.3, 0.0);
  CHECK(s.interactions(0, 1).is_zero());
  CHECK(s.interactions(0, 0).strength == doctest::Approx(0.3 * m.interactions(0, 0).strength));
  const auto t = scaled_model(m, 0.3, 2.0);
  CHECK(t.interactions(1, 0).strength == doctest::Approx(0.6 * m.interactions(1, 0).strength));
}

TEST_CASE("model files parse with the documented keys") {
  const auto cfg = load_model_config(test::source_dir() / "models" / "repulsive.toml");
  CHECK(cfg.id == "repulsive");
  CHECK(cfg.dimension == 3);
  CHECK(cfg.bands.size() == 2);
  CHECK(cfg.interactions.size() == 3);
  CHECK_THROWS_AS(parse_model_config("dimension = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_model_config("dimension = 3\n[[bands]]\nmass = 0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_model_config("dimension = [\n"), ConfigError);
  CHECK_THROWS_AS(parse_model_config("dimension = 3\n[[bands]]\nmass = 0.5\nmu = 1\n[[interactions]]\npair = [0, 1]\n"
                                     "family = \"gaussian\"\nstrength = 1\nrange = 1\n"),
                  ConfigError);
}
