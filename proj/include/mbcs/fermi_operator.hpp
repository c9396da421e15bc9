#pragma once

// Fermi-surface operator channel by channel and the weak-coupling constants
// derived from it.

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "mbcs/model.hpp"

namespace mbcs {

inline constexpr int kDefaultFermiEllMax = 16;

/// ell = 0 Fermi-surface matrix element of V_ab, computed from the real-space
/// potential by radial quadrature of V_ab(r) j_d(k_a r) j_d(k_b r).
double v_coefficient(const ModelInstance& model, std::size_t a, std::size_t b);

/// n x n matrix of <u_a(ell), V_ab u_b(ell)> built from channel kernels at
/// the Fermi momenta (no lambda / kappa scaling).
Eigen::MatrixXd fermi_channel_matrix(const ModelInstance& model, int ell);

struct ChannelSpectrum {
  int ell = 0;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors;
};

ChannelSpectrum channel_spectrum(const ModelInstance& model, int ell);

struct IntraBandMinimum {
  double value = 0.0;  // e_a
  int ell = 0;         // achieving channel
};

IntraBandMinimum intra_band_minimum(const ModelInstance& model, std::size_t a, int ell_max = kDefaultFermiEllMax);

struct TraceCheck {
  double numeric = 0.0;
  double analytic = 0.0;
  double tail = 0.0;  // |contribution of the last channel|, a truncation indicator
};

TraceCheck trace_check(const ModelInstance& model, std::size_t a, int ell_max = 32);

struct PerturbationConstants {
  double e_hat = 0.0;
  std::vector<std::size_t> minimizing_bands;
  int channel = 0;  // channel of the unperturbed ground state
  bool degenerate = false;
  double U1_plus = 0.0, U1_minus = 0.0;
  double U2 = 0.0;
  double A1_plus = 0.0, A1_minus = 0.0;
  double A2 = 0.0;
  /// Closed form sum |v_{a a^}|^2 / (|v_{a^a^}|^2 |v_{a^a^} - v_aa|) when the
  /// unique-minimizer s-wave setting applies.
  std::optional<double> A2_closed_form;
};

/// Throws ConfigError when min_a e_a >= 0.
PerturbationConstants perturbation_constants(const ModelInstance& model, int ell_max = kDefaultFermiEllMax);

/// inf spec(V^d + kappa V^od) over channels 0..ell_max.
double fermi_min_eigenvalue(const ModelInstance& model, double kappa, int ell_max = kDefaultFermiEllMax);

/// Closed-form lowest eigenvalue of the 2 x 2 s-wave channel matrix with the
/// off-diagonal scaled by kappa. Requires n = 2.
double v_min_two_band(const ModelInstance& model, double kappa);

}  // namespace mbcs
