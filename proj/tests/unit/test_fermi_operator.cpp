#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "common.hpp"
#include "mbcs/fermi_operator.hpp"
#include "mbcs/kernels.hpp"
#include "mbcs/records.hpp"

using namespace mbcs;

namespace {

// Channel-ell Fermi value of V_aa in d = 3 from real space:
// |S^2| (2 pi)^{-3} (4 m^2)^{3/4} mu^{1/4} int V(x) j_ell(k_F |x|)^2 dx.
double channel_value_oracle(const ModelInstance& m, std::size_t a, int ell) {
  const auto& b = m.bands[a];
  const double kf = b.fermi_momentum(), pi = std::numbers::pi;
  const auto& pot = m.interactions(a, a);
  auto f = [&](double r) {
    const double j = std::sph_bessel(static_cast<unsigned>(ell), kf * r);
    return pot.real_space(r) * j * j * r * r;
  };
  double s = 0.0;
  using boost::math::quadrature::gauss_kronrod;
  for (int i = 0; i < 40; ++i) s += gauss_kronrod<double, 61>::integrate(f, 0.5 * i, 0.5 * (i + 1), 10, 1e-15);
  const double pref = 4 * pi * std::pow(2 * pi, -3.0) * std::pow(4 * b.mass * b.mass, 0.75) *
                      std::pow(b.chemical_potential, 0.25);
  return pref * 4 * pi * s;
}

ModelInstance without_offdiagonal(const ModelInstance& m) {
  ModelInstance out = m;
  out.interactions = InteractionMatrix(m.n_bands());
  for (std::size_t a = 0; a < m.n_bands(); ++a) out.interactions.set(a, a, m.interactions(a, a));
  return out;
}

}  // namespace

TEST_CASE("v_coefficient against the golden constants") {
  const auto golden = read_golden(test::source_dir() / "tests" / "golden" / "constants.csv");
  int checked = 0;
  for (const auto& g : golden) {
    if (g.quantity.size() != 3 || g.quantity[0] != 'v') continue;
    const auto m = test::reference_model(g.model_id);
    const std::size_t a = static_cast<std::size_t>(g.quantity[1] - '1');
    const std::size_t b = static_cast<std::size_t>(g.quantity[2] - '1');
    CAPTURE(g.model_id);
    CAPTURE(g.quantity);
    CHECK(test::rel(v_coefficient(m, a, b), g.value) <= 1e-10);
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("v_coefficient symmetry and sign") {
  ModelConfig c;
  c.dimension = 2;
  c.bands = {{0.5, 1.0}, {0.9, 0.4}};
  c.interactions = {{0, 0, "gaussian", -1.0, 1.0}, {1, 1, "exponential", 0.6, 0.5}, {0, 1, "exponential", -0.4, 0.8}};
  const auto m = build_model(c);
  CHECK(v_coefficient(m, 0, 1) == doctest::Approx(v_coefficient(m, 1, 0)).epsilon(1e-14));
  CHECK(v_coefficient(m, 0, 0) <= 0.0);
  CHECK(v_coefficient(m, 1, 1) >= 0.0);
}

TEST_CASE("channel_spectrum") {
  for (int d = 1; d <= 3; ++d)
    for (const char* fam : {"gaussian", "exponential"}) {
      const auto m = test::one_band(d, -1.0, 0.8, fam);
      const auto sp = channel_spectrum(m, 0);
      CAPTURE(d);
      CAPTURE(fam);
      CHECK(test::rel(sp.matrix(0, 0), v_coefficient(m, 0, 0)) <= 1e-8);
    }
  const auto m = test::reference_model("dominant");
  const auto sp = channel_spectrum(m, 0);
  CHECK((sp.matrix - sp.matrix.transpose()).norm() == 0.0);
  const Eigen::MatrixXd back = sp.eigenvectors * sp.eigenvalues.asDiagonal() * sp.eigenvectors.transpose();
  CHECK((back - sp.matrix).norm() <= 1e-12 * sp.matrix.norm());
  CHECK(sp.eigenvalues(0) <= sp.eigenvalues(1));
  const auto deg = without_offdiagonal(test::reference_model("degenerate"));
  const auto dsp = channel_spectrum(deg, 0);
  CHECK(dsp.eigenvalues(0) == doctest::Approx(dsp.eigenvalues(1)).epsilon(1e-14));
  CHECK_THROWS_AS(channel_spectrum(test::one_band(1), 2), ConfigError);
}

TEST_CASE("intra_band_minimum against real-space channel values") {
  const auto m = test::one_band(3);
  const auto e = intra_band_minimum(m, 0, 8);
  CHECK(e.ell == 0);
  CHECK(e.value <= v_coefficient(m, 0, 0) + 1e-15);
  double best = 0.0;
  int arg = -1;
  for (int ell = 0; ell <= 8; ++ell) {
    const double o = channel_value_oracle(m, 0, ell);
    const double v = fermi_channel_matrix(m, ell)(0, 0);
    CAPTURE(ell);
    CHECK(std::abs(v - o) <= 1e-8 * std::abs(channel_value_oracle(m, 0, 0)));
    if (arg < 0 || o < best) best = o, arg = ell;
  }
  CHECK(arg == 0);
  CHECK(test::rel(e.value, best) <= 1e-8);
  const auto zero = test::one_band(3, 0.0);
  CHECK(intra_band_minimum(zero, 0).value == 0.0);
}

TEST_CASE("trace_check") {
  const auto zero = test::one_band(3, 0.0);
  const auto tz = trace_check(zero, 0, 32);
  CHECK(tz.numeric == 0.0);
  CHECK(tz.analytic == 0.0);
  for (double g : {-1.0, 0.7}) {
    const auto t = trace_check(test::one_band(3, g, 1.0), 0, 32);
    CHECK(test::rel(t.numeric, t.analytic) <= 1e-4);
    CHECK((t.analytic > 0) == (g > 0));
  }
  const auto t2 = trace_check(test::one_band(2, -1.0, 0.9), 0, 32);
  CHECK(test::rel(t2.numeric, t2.analytic) <= 1e-4);
}

TEST_CASE("perturbation_constants: degenerate pair") {
  const auto m = test::reference_model("degenerate");
  const auto pc = perturbation_constants(m);
  CHECK(pc.degenerate);
  CHECK(pc.minimizing_bands.size() == 2);
  const double v11 = v_coefficient(m, 0, 0), v12 = v_coefficient(m, 0, 1);
  CHECK(test::rel(pc.A1_plus, std::abs(v12) / (v11 * v11)) <= 1e-8);
  CHECK(pc.A1_plus == doctest::Approx(pc.A1_minus).epsilon(1e-12));
  CHECK(pc.A1_plus == doctest::Approx(pc.U1_plus / (pc.e_hat * pc.e_hat)).epsilon(1e-15));
  // finite-difference slopes of the lowest eigenvalue of V^d + kappa V^od
  const double h = 1e-6;
  const double e0 = fermi_min_eigenvalue(m, 0.0);
  CHECK(test::rel((e0 - fermi_min_eigenvalue(m, h)) / h, pc.U1_plus) <= 1e-6);
  CHECK(test::rel((e0 - fermi_min_eigenvalue(m, -h)) / h, pc.U1_minus) <= 1e-6);
  for (const auto& g : read_golden(test::source_dir() / "tests" / "golden" / "constants.csv"))
    if (g.model_id == "degenerate" && g.quantity == "A1") CHECK(test::rel(pc.A1_plus, g.value) <= 1e-8);
}

TEST_CASE("perturbation_constants: unique minimizer") {
  const auto m = test::reference_model("dominant");
  const auto pc = perturbation_constants(m);
  CHECK_FALSE(pc.degenerate);
  REQUIRE(pc.minimizing_bands.size() == 1);
  CHECK(pc.minimizing_bands[0] == 0);
  REQUIRE(pc.A2_closed_form.has_value());
  CHECK(test::rel(pc.A2, *pc.A2_closed_form) <= 1e-8);
  CHECK(pc.A2 == doctest::Approx(pc.U2 / (pc.e_hat * pc.e_hat)).epsilon(1e-15));
  const double h = 1e-3;
  const double curv =
      (2 * fermi_min_eigenvalue(m, 0.0) - fermi_min_eigenvalue(m, h) - fermi_min_eigenvalue(m, -h)) / (2 * h * h);
  CHECK(test::rel(curv, pc.U2) <= 1e-4);
  for (const auto& g : read_golden(test::source_dir() / "tests" / "golden" / "constants.csv"))
    if (g.model_id == "dominant" && g.quantity == "A2") CHECK(test::rel(pc.A2, g.value) <= 1e-8);
}

TEST_CASE("perturbation_constants: decoupled and repulsive models") {
  const auto dec = without_offdiagonal(test::reference_model("dominant"));
  const auto pc = perturbation_constants(dec);
  CHECK(pc.U1_plus == 0.0);
  CHECK(pc.U1_minus == 0.0);
  CHECK(pc.U2 == 0.0);
  CHECK(pc.A2 == 0.0);
  const auto dd = perturbation_constants(without_offdiagonal(test::reference_model("degenerate")));
  CHECK(dd.degenerate);
  CHECK(dd.A1_plus == 0.0);
  CHECK(dd.A1_minus == 0.0);
  CHECK(perturbation_constants(test::reference_model("two_band")).A2 > 0.0);
  CHECK_THROWS_AS(perturbation_constants(test::reference_model("repulsive")), ConfigError);
}

TEST_CASE("v_min_two_band") {
  const auto m = test::reference_model("two_band");
  const double v11 = v_coefficient(m, 0, 0), v22 = v_coefficient(m, 1, 1), v12 = v_coefficient(m, 0, 1);
  CHECK(v_min_two_band(m, 0.0) == doctest::Approx(std::min(v11, v22)).epsilon(1e-14));
  for (double k : {-2.0, 0.3, 5.0}) {
    Eigen::Matrix2d a;
    a << v11, k * v12, k * v12, v22;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(a);
    CHECK(std::abs(v_min_two_band(m, k) - es.eigenvalues()(0)) <= 1e-12);
  }
  const auto d = test::reference_model("degenerate");
  const double dv = v_coefficient(d, 0, 0), d12 = v_coefficient(d, 0, 1);
  CHECK(v_min_two_band(d, 0.7) == doctest::Approx(dv - std::abs(0.7 * d12)).epsilon(1e-14));
  CHECK_THROWS_AS(v_min_two_band(test::one_band(3), 0.1), ConfigError);
  const auto r = test::reference_model("repulsive");
  CHECK(v_min_two_band(r, 0.0) > 0.0);
  CHECK(v_min_two_band(r, 10.0) < 0.0);
}

TEST_CASE("lowest Fermi eigenvalue is concave, even and maximal at kappa = 0") {
  const auto m = test::reference_model("two_band");
  const double e0 = fermi_min_eigenvalue(m, 0.0, 4);
  for (double k : {0.05, 0.3, 1.0, 4.0}) {
    CHECK(fermi_min_eigenvalue(m, k, 4) <= e0);
    CHECK(fermi_min_eigenvalue(m, k, 4) == doctest::Approx(fermi_min_eigenvalue(m, -k, 4)).epsilon(1e-13));
  }
  for (auto [a, b] : {std::pair{-2.0, 0.5}, std::pair{0.1, 3.0}, std::pair{-0.7, -0.2}})
    CHECK(fermi_min_eigenvalue(m, 0.5 * (a + b), 4) >=
          0.5 * (fermi_min_eigenvalue(m, a, 4) + fermi_min_eigenvalue(m, b, 4)) - 1e-14);
}
