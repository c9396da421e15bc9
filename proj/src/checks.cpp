#include "mbcs/checks.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "mbcs/fermi_operator.hpp"
#include "mbcs/kernels.hpp"

namespace mbcs {

namespace bq = boost::math::quadrature;

ModelInstance builtin_reference_model() {
  ModelConfig cfg;
  cfg.id = "builtin";
  cfg.dimension = 3;
  cfg.bands = {{0.5, 1.0}};
  cfg.interactions = {{0, 0, "gaussian", -1.0, 1.0}};
  return build_model(cfg);
}

namespace {

double jd_oracle(int d, double y) {
  switch (d) {
    case 1:
      return 0.5 * (std::cos(y) + std::cos(-y));
    case 2:
      return bq::gauss_kronrod<double, 61>::integrate([&](double t) { return std::cos(y * std::cos(t)); }, 0.0,
                                                      std::numbers::pi, 15, 1e-14) /
             std::numbers::pi;
    default:
      return 0.5 * bq::gauss_kronrod<double, 61>::integrate([&](double t) { return std::cos(y * t); }, -1.0, 1.0, 15,
                                                            1e-14);
  }
}

}  // namespace

std::vector<CheckResult> run_builtin_checks(const ModelInstance* given) {
  const ModelInstance model = given ? *given : builtin_reference_model();
  std::vector<CheckResult> out;

  double jd_err = 0.0;
  for (int d = 1; d <= 3; ++d)
    for (double y : {0.1, 1.0, 10.0}) jd_err = std::max(jd_err, std::abs(angular_average(d, y) - jd_oracle(d, y)));
  out.push_back({"angular_average_oracle", jd_err <= 1e-10, jd_err, 1e-10});

  if (model.dimension >= 2) {
    for (std::size_t a = 0; a < model.n_bands(); ++a) {
      if (model.interactions(a, a).is_zero()) continue;
      const TraceCheck tc = trace_check(model, a, 32);
      const double err = std::abs(tc.numeric - tc.analytic) / std::abs(tc.analytic);
      out.push_back({"trace_identity_band_" + std::to_string(a + 1), err <= 1e-4, err, 1e-4});
    }
  }

  const double T = 0.01 * model.min_mu();
  const RadialGrid grid = build_grid(model, T);
  const int d = model.dimension;
  for (std::size_t a = 0; a < model.n_bands(); ++a) {
    const auto& band = model.bands[a];
    const auto& bg = grid.bands[a];
    double measure = 0.0, kt = 0.0;
    for (std::size_t i = 0; i < bg.nodes.size(); ++i) {
      measure += bg.weights[i];
      kt += bg.weights[i] / kt_symbol(band, bg.nodes[i], T);
    }
    const double L = grid.uv_cutoff;
    const double exact = std::pow(L, d) / d;
    const double merr = std::abs(measure - exact) / exact;
    out.push_back({"grid_measure_band_" + std::to_string(a + 1), merr <= 1e-10, merr, 1e-10});

    const double kf = band.fermi_momentum();
    auto f = [&](double p) { return std::pow(p, d - 1) / kt_symbol(band, p, T); };
    double oracle = 0.0;
    const double w = 50.0 * T / band.fermi_velocity();
    const double cuts[] = {0.0, std::max(0.0, kf - w), kf, kf + w, L};
    for (int k = 0; k + 1 < 5; ++k)
      if (cuts[k + 1] > cuts[k]) oracle += bq::gauss_kronrod<double, 61>::integrate(f, cuts[k], cuts[k + 1], 20, 1e-13);
    const double kerr = std::abs(kt - oracle) / oracle;
    out.push_back({"grid_kt_integral_band_" + std::to_string(a + 1), kerr <= 1e-6, kerr, 1e-6});
  }
  return out;
}

}  // namespace mbcs
