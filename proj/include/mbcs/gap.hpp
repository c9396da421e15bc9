#pragma once

// s-wave multi-band gap equation on a radial grid and the BCS free energy of
// the corresponding BdG states.

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mbcs/kernels.hpp"
#include "mbcs/model.hpp"

namespace mbcs {

struct GapOptions {
  double damping = 0.5;
  int anderson_depth = 3;
  int max_iter = 2000;
  int newton_max = 100;
  /// Sup-norm defect target, in units of max mu.
  double gap_tol = 1e-12;
  /// Solutions with max |Delta| below trivial_threshold * T count as trivial.
  double trivial_threshold = 1e-6;
  /// Fixed-point iterations stop and Newton takes over below this defect
  /// (relative to max |Delta|).
  double newton_switch = 1e-3;
  int restarts = 2;
  /// Restart with 10x seed when the iteration collapses to Delta = 0.
  bool expect_nontrivial = false;
};

struct GapSolution {
  double T = 0.0;
  double lambda = 0.0;
  double kappa = 0.0;
  Eigen::VectorXd delta;  // stacked over bands as in RadialGrid
  double residual = 0.0;
  int iterations = 0;
  int restarts_used = 0;
  bool converged = false;
  bool trivial = true;
  std::vector<double> residual_history;

  double max_abs() const { return delta.size() ? delta.cwiseAbs().maxCoeff() : 0.0; }
};

/// The s-wave gap map on a fixed grid.
class GapSystem {
 public:
  GapSystem(const ModelInstance& model, RadialGrid grid);
  GapSystem(const ModelInstance& model, RadialGrid grid, const ChannelKernels& kernels);

  const ModelInstance& model() const { return *model_; }
  const RadialGrid& grid() const { return grid_; }
  std::size_t size() const { return grid_.total_points(); }
  double epsilon(std::size_t i) const { return eps_[i]; }
  double weight(std::size_t i) const { return w_[i]; }

  /// lambda kappa^{[a != b]} c_d K_0(p_i, q_j) w_j.
  Eigen::MatrixXd coupling_matrix(double lambda, double kappa) const;
  /// Right side of the gap equation, -(2 pi)^{-d/2} sum_b int V_ab tanh(E/2T)/E Delta.
  Eigen::VectorXd apply(const Eigen::MatrixXd& coupling, double T, const Eigen::VectorXd& delta) const;

 private:
  const ModelInstance* model_;
  RadialGrid grid_;
  Eigen::MatrixXd kernel_;  // c_d K_0
  std::vector<double> eps_, w_;
};

Eigen::VectorXd gap_seed(const GapSystem& sys, double amplitude);

GapSolution solve_gap(const GapSystem& sys, double T, double lambda, double kappa, double init,
                      const GapOptions& opts = {}, const Eigen::VectorXd* seed = nullptr);
GapSolution solve_gap(const ModelInstance& model, const RadialGrid& grid, double T, double lambda, double kappa,
                      double init, const GapOptions& opts = {});

/// Sup-norm of Delta - (gap map)(Delta).
double gap_defect(const GapSystem& sys, double T, double lambda, double kappa, const Eigen::VectorXd& delta);

/// Sup-norm of (K_T^Delta + V) alpha with alpha = Delta tanh(E/2T) / (2E).
double euler_lagrange_residual(const GapSystem& sys, double T, double lambda, double kappa,
                               const Eigen::VectorXd& delta);

/// Free energy per unit volume of the BdG state built from Delta, minus
/// that of the normal state, formed integrand by integrand.
double free_energy_density(const GapSystem& sys, double T, double lambda, double kappa, const Eigen::VectorXd& delta);

struct GapTcResult {
  bool found = false;
  double tc = 0.0;
  double T_lo = 0.0, T_hi = 0.0;
  int iterations = 0;
};

/// Bisection in log T on triviality of the gap solution between T_lo
/// (nontrivial) and T_hi (trivial). Each step is seeded with the solution
/// at the highest nontrivial temperature found so far.
GapTcResult gap_critical_temperature(const GapSystem& sys, double lambda, double kappa, double T_lo, double T_hi,
                                     double rel_tol, const GapOptions& opts = {});

void write_gap_csv(std::ostream& os, const GapSystem& sys, const GapSolution& sol);

}  // namespace mbcs
