#pragma once

// Discretized Birman-Schwinger operator, critical temperatures, kappa
// thresholds and the singular/bounded split of the operator.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mbcs/kernels.hpp"
#include "mbcs/model.hpp"

namespace mbcs {

struct SolverOptions {
  GridOptions grid;
  /// Channels 0..ell_max are searched for T_c (d = 1 caps this at 1).
  int ell_max = 2;
  double bisect_tol = 1e-6;
  double eig_tol = 1e-9;
  int max_iterations = 200;
  /// T_floor and T_ceiling in units of max mu.
  double t_floor = kTemperatureFloor;
  double t_ceiling = 10.0;
  /// kappa scan for the thresholds: geometric from kappa_scan_min.
  double kappa_scan_min = 1e-6;
  double kappa_scan_max = 10.0;
  /// Optional starting temperature for the T_c bracket search.
  std::optional<double> t_hint;
};

/// Symmetric congruent form lambda K_T^{-1/2} V K_T^{-1/2} in channel ell.
struct ChannelOperator {
  int ell = 0;
  double T = 0.0;
  double lambda = 0.0;
  double kappa = 0.0;
  Eigen::MatrixXd matrix;
};

ChannelOperator assemble_operator(const ModelInstance& model, const RadialGrid& grid, const ChannelKernels& kernels,
                                  double T, double lambda, double kappa, int ell);
ChannelOperator assemble_operator(const ModelInstance& model, const RadialGrid& grid, double T, double lambda,
                                  double kappa, int ell);

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;
};

/// Smallest eigenpair; throws SolverError on eigensolver failure.
EigenPair min_eigenvalue(const ChannelOperator& op);
double min_eigenvalue_only(const Eigen::MatrixXd& matrix);

/// A grid with its kernels, evaluating channel minima at temperatures the
/// grid supports.
class BirmanSchwinger {
 public:
  BirmanSchwinger(const ModelInstance& model, double design_temperature, const SolverOptions& opts);

  const ModelInstance& model() const { return *model_; }
  const RadialGrid& grid() const { return grid_; }
  const ChannelKernels& kernels() const { return kernels_; }
  int ell_max() const { return kernels_.ell_max; }

  double min_eig(double T, double lambda, double kappa, int ell) const;
  /// Minimum over all channels and the channel achieving it.
  std::pair<double, int> min_eig_all(double T, double lambda, double kappa) const;

 private:
  const ModelInstance* model_;
  RadialGrid grid_;
  ChannelKernels kernels_;
};

struct TcResult {
  bool found = false;
  double tc = 0.0;
  double T_lo = 0.0, T_hi = 0.0;
  std::vector<std::pair<double, double>> min_eig_trajectory;
  int channel_of_minimum = 0;
  int iterations = 0;
  double min_eig_at_tc = 0.0;
  std::size_t grid_points = 0;
  /// min eig < -1 at tc (1 - 2 bisect_tol) and > -1 at tc (1 + 2 bisect_tol);
  /// when not found, min eig >= -1 at T_floor.
  bool certified = false;
};

TcResult critical_temperature(const ModelInstance& model, double lambda, double kappa, const SolverOptions& opts = {});

/// Root search restricted to [T_lo, T_hi] on a fixed grid. Requires the
/// channel minimum to be below -1 at T_lo and above at T_hi.
TcResult critical_temperature_on_grid(const BirmanSchwinger& bs, double lambda, double kappa, double T_lo, double T_hi,
                                      const SolverOptions& opts = {});

/// f(kappa) = min eig of the operator at T = T_c(lambda, 0) plus one.
class KappaProbe {
 public:
  KappaProbe(const ModelInstance& model, double lambda, const SolverOptions& opts = {});

  double operator()(double kappa) const;
  double temperature() const { return T_; }
  bool reference_found() const { return reference_found_; }
  const TcResult& reference() const { return reference_; }

 private:
  double lambda_;
  TcResult reference_;
  bool reference_found_ = false;
  double T_ = 0.0;
  std::optional<BirmanSchwinger> bs_;
};

struct KappaThresholds {
  double minus = 0.0, plus = 0.0;
  bool minus_infinite = false, plus_infinite = false;
  bool reference_found = true;
  double reference_temperature = 0.0;
  /// f is compared against -crossing_level to declare a crossing.
  double crossing_level = 0.0;
};

KappaThresholds kappa_thresholds(const ModelInstance& model, double lambda, const SolverOptions& opts = {});
KappaThresholds kappa_thresholds(const KappaProbe& probe, const SolverOptions& opts = {});

struct SingularSplit {
  double remainder_norm = 0.0;  // || |V|^{1/2} M_T |V|^{1/2} ||, i.e. remainder / lambda
  double full_norm = 0.0;       // || |V|^{1/2} K_T^{-1} |V|^{1/2} ||
  double log_factor = 0.0;      // log(T0 / T)
  std::size_t radial_points = 0;
};

/// Splits lambda |V|^{1/2} K_T^{-1} |V|^{1/2} in channel ell into
/// lambda log(T0/T) |V|^{1/2} F^dagger F |V|^{1/2} plus a remainder, on a
/// radial position grid, and returns the norms divided by lambda.
SingularSplit singular_split(const ModelInstance& model, const RadialGrid& grid, double T, double lambda, double kappa,
                             double T0, int ell = 0);
double singular_split_norm(const ModelInstance& model, const RadialGrid& grid, double T, double lambda, double kappa,
                           double T0, int ell = 0);

}  // namespace mbcs
