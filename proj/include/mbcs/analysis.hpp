#pragma once

// kappa sweeps of T_c and the weak-coupling enhancement laws fitted to them.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mbcs/fermi_operator.hpp"
#include "mbcs/spectral.hpp"

namespace mbcs {

struct SweepRecord {
  std::string run_id;
  int dimension = 3;
  std::size_t n_bands = 0;
  double lambda = 0.0;
  double kappa = 0.0;
  bool tc_found = false;
  double tc = 0.0;
  bool tc_ref_found = false;
  double tc_ref = 0.0;
  double min_eig_at_tc = 0.0;
  int channel = 0;
  std::size_t grid_points = 0;
  int iterations = 0;
  /// lambda log(tc / tc_ref) when both are found.
  std::optional<double> log_ratio;
  bool certified = false;
  /// Non-empty when the point failed; the remaining fields are then unset.
  std::string error;
};

SweepRecord make_record(const ModelInstance& model, double lambda, double kappa, const TcResult& tc,
                        const TcResult* reference, const std::string& run_id);

/// Runs T_c at kappa = 0 and at every kappa, on `workers` threads. The
/// reference row comes first, then the points in the given order.
std::vector<SweepRecord> sweep_kappa(const ModelInstance& model, double lambda, const std::vector<double>& kappas,
                                     const SolverOptions& opts, int workers = 1);

/// Applies f(i) for i in [0, count) on a pool of worker threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& f);

enum class Branch { linear_plus, linear_minus, quadratic };

std::string branch_name(Branch b);

struct FitWindow {
  double lo = 0.0;
  double hi = 1e300;
  /// Quadratic branch only: +1 / -1 restricts to one sign of kappa, 0 uses both.
  int side = 0;
};

struct EnhancementFit {
  Branch branch = Branch::quadratic;
  int side = 0;
  double slope = 0.0;
  FitWindow fit_window;
  double residual_norm = 0.0;
  std::size_t points = 0;
  std::optional<double> prediction;
  std::optional<double> agreement;  // |slope - prediction| / |prediction|
};

/// Zero-intercept least squares of lambda log-ratio against |kappa| (linear
/// branches) or kappa^2 (quadratic). Throws ConfigError on fewer than five
/// usable records or mixed lambda.
EnhancementFit fit_enhancement(const std::vector<SweepRecord>& records, Branch branch, const FitWindow& window = {},
                               std::optional<double> prediction = std::nullopt);

/// T0_fit exp(1 / (lambda v_min(kappa))); nullopt when v_min(kappa) >= 0,
/// i.e. T_c = 0 for small lambda.
std::optional<double> two_band_prediction(const ModelInstance& model, double lambda, double kappa, double T0_fit);

/// T0_fit from one computed T_c.
double calibrate_t0(const ModelInstance& model, double lambda, double kappa, double tc);

struct TwoBandPoint {
  double lambda = 0.0;
  double tc = 0.0;
  std::optional<double> prediction;
  /// |lambda log T_pred - lambda log T_c| / |lambda log T_c| with T in units of max mu.
  double rel_error = 0.0;
};

struct TwoBandCheck {
  double kappa = 0.0;
  double lambda_ref = 0.4;
  double tc_ref = 0.0;
  double T0_fit = 0.0;
  std::vector<TwoBandPoint> points;
};

TwoBandCheck two_band_check(const ModelInstance& model, double kappa, const std::vector<double>& lambdas,
                            const SolverOptions& opts, double lambda_ref = 0.4);

struct Verdict {
  std::string claim;
  std::string status;  // pass, fail, flagged, not_applicable
  std::string detail;
};

struct LambdaReport {
  double lambda = 0.0;
  std::vector<SweepRecord> records;
  KappaThresholds thresholds;
  std::vector<EnhancementFit> fits;
  std::vector<std::string> fit_errors;
};

struct AsymptoticReport {
  std::string model_id;
  std::optional<PerturbationConstants> constants;
  std::string constants_error;
  std::vector<LambdaReport> per_lambda;
  std::optional<TwoBandCheck> two_band;
  std::vector<Verdict> verdicts;
  bool partial = false;
};

struct ReportOptions {
  SolverOptions solver;
  int workers = 1;
  double two_band_kappa = 0.2;
  std::vector<double> two_band_lambdas{0.3, 0.25, 0.2};
};

AsymptoticReport asymptotic_report(const ModelInstance& model, const std::vector<double>& lambdas,
                                   const std::vector<double>& kappas, const ReportOptions& opts = {});

}  // namespace mbcs
