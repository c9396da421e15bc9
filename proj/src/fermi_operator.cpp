#include "mbcs/fermi_operator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mbcs/kernels.hpp"
#include "mbcs/quadrature.hpp"

namespace mbcs {

namespace {

constexpr double kDegeneracyTol = 1e-10;

double fermi_prefactor(const ModelInstance& model, std::size_t a, std::size_t b) {
  const auto& ba = model.bands[a];
  const auto& bb = model.bands[b];
  const int d = model.dimension;
  return 2.0 * channel_constant(d) * std::sqrt(ba.mass * bb.mass) *
         std::pow(ba.fermi_momentum() * bb.fermi_momentum(), 0.5 * (d - 2));
}

}  // namespace

double v_coefficient(const ModelInstance& model, std::size_t a, std::size_t b) {
  const RadialPotential& pot = model.interactions(a, b);
  if (pot.is_zero()) return 0.0;
  const int d = model.dimension;
  const auto& ba = model.bands[a];
  const auto& bb = model.bands[b];
  const double ka = ba.fermi_momentum(), kb = bb.fermi_momentum();

  const double s = pot.range;
  const double rmax = pot.family == PotentialFamily::gaussian ? 9.5 * s : 45.0 * s;
  const double h = std::min(0.5 * s, 1.0 / (ka + kb));
  const int panels = static_cast<int>(std::ceil(rmax / h));
  const double radial = composite_gauss(
      [&](double r) {
        return pot.real_space(r) * angular_average(d, ka * r) * angular_average(d, kb * r) * std::pow(r, d - 1);
      },
      0.0, rmax, panels, 16);

  const double area = sphere_area(d);
  return area * std::pow(2.0 * std::numbers::pi, -d) * std::pow(4.0 * ba.mass * bb.mass, 0.25 * d) *
         std::pow(ba.chemical_potential * bb.chemical_potential, 0.25 * (d - 2)) * area * radial;
}

Eigen::MatrixXd fermi_channel_matrix(const ModelInstance& model, int ell) {
  check_channel(model.dimension, ell);
  const std::size_t n = model.n_bands();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      const double v = fermi_prefactor(model, a, b) *
                       channel_kernel(model, a, b, ell, model.bands[a].fermi_momentum(),
                                      model.bands[b].fermi_momentum());
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
      m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
    }
  return m;
}

ChannelSpectrum channel_spectrum(const ModelInstance& model, int ell) {
  ChannelSpectrum out;
  out.ell = ell;
  out.matrix = fermi_channel_matrix(model, ell);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.matrix);
  if (es.info() != Eigen::Success) throw SolverError("channel_spectrum: eigensolver failed");
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  return out;
}

IntraBandMinimum intra_band_minimum(const ModelInstance& model, std::size_t a, int ell_max) {
  IntraBandMinimum best{0.0, 0};
  const int lmax = max_channel(model.dimension, ell_max);
  const double ka = model.bands[a].fermi_momentum();
  for (int ell = 0; ell <= lmax; ++ell) {
    const double v = fermi_prefactor(model, a, a) * channel_kernel(model, a, a, ell, ka, ka);
    if (ell == 0 || v < best.value) best = {v, ell};
  }
  return best;
}

TraceCheck trace_check(const ModelInstance& model, std::size_t a, int ell_max) {
  const int d = model.dimension;
  const auto& band = model.bands[a];
  const double ka = band.fermi_momentum();
  const RadialPotential& pot = model.interactions(a, a);
  TraceCheck out;
  if (pot.is_zero()) return out;
  const int lmax = max_channel(d, ell_max);
  for (int ell = 0; ell <= lmax; ++ell) {
    const double v = channel_degeneracy(d, ell) * fermi_prefactor(model, a, a) * channel_kernel(model, a, a, ell, ka, ka);
    out.numeric += v;
    if (ell == lmax) out.tail = std::abs(v);
  }
  // 2 (2 pi)^{-d/2} V(0) \int_{S_a} |grad eps|^{-1}
  const double surface = sphere_area(d) * std::pow(ka, d - 1) / band.fermi_velocity();
  out.analytic = 2.0 * std::pow(2.0 * std::numbers::pi, -0.5 * d) * potential_fourier(pot, d, 0.0) * surface;
  return out;
}

PerturbationConstants perturbation_constants(const ModelInstance& model, int ell_max) {
  const std::size_t n = model.n_bands();
  const int lmax = max_channel(model.dimension, ell_max);
  std::vector<Eigen::MatrixXd> channels;
  for (int ell = 0; ell <= lmax; ++ell) channels.push_back(fermi_channel_matrix(model, ell));

  std::vector<double> e(n);
  std::vector<int> arg(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    const auto ia = static_cast<Eigen::Index>(a);
    e[a] = channels[0](ia, ia);
    for (int ell = 1; ell <= lmax; ++ell)
      if (channels[ell](ia, ia) < e[a]) {
        e[a] = channels[ell](ia, ia);
        arg[a] = ell;
      }
  }
  PerturbationConstants pc;
  const auto it = std::min_element(e.begin(), e.end());
  pc.e_hat = *it;
  double scale = 0.0;
  for (const auto& c : channels) scale = std::max(scale, c.cwiseAbs().maxCoeff());
  // high channels of a repulsive potential can dip below zero by roundoff
  if (!(pc.e_hat < -1e-12 * scale))
    throw ConfigError("perturbation_constants: no band has an attractive Fermi-surface channel (min e_a >= 0)");
  const double tol = kDegeneracyTol * std::abs(pc.e_hat);
  for (std::size_t a = 0; a < n; ++a)
    if (std::abs(e[a] - pc.e_hat) <= tol) pc.minimizing_bands.push_back(a);
  const std::size_t a_hat = pc.minimizing_bands.front();
  pc.channel = arg[a_hat];
  pc.degenerate = pc.minimizing_bands.size() >= 2;

  if (pc.degenerate) {
    // Degenerate first-order perturbation theory: the off-diagonal block
    // restricted to the joint ground space, channel by channel.
    double slope_min = 0.0, slope_max = 0.0;
    for (int ell = 0; ell <= lmax; ++ell) {
      std::vector<Eigen::Index> ground;
      for (std::size_t a = 0; a < n; ++a) {
        const auto ia = static_cast<Eigen::Index>(a);
        if (std::abs(channels[ell](ia, ia) - pc.e_hat) <= tol) ground.push_back(ia);
      }
      if (ground.size() < 2) continue;
      const auto g = static_cast<Eigen::Index>(ground.size());
      Eigen::MatrixXd restricted = Eigen::MatrixXd::Zero(g, g);
      for (Eigen::Index i = 0; i < g; ++i)
        for (Eigen::Index j = 0; j < g; ++j)
          if (i != j) restricted(i, j) = channels[ell](ground[i], ground[j]);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(restricted, Eigen::EigenvaluesOnly);
      slope_min = std::min(slope_min, es.eigenvalues()(0));
      slope_max = std::max(slope_max, es.eigenvalues()(g - 1));
    }
    pc.U1_plus = -slope_min;
    pc.U1_minus = slope_max;
  } else {
    const Eigen::MatrixXd& m = channels[pc.channel];
    const auto ih = static_cast<Eigen::Index>(a_hat);
    for (std::size_t a = 0; a < n; ++a) {
      if (a == a_hat) continue;
      const auto ia = static_cast<Eigen::Index>(a);
      pc.U2 += m(ia, ih) * m(ia, ih) / (m(ia, ia) - pc.e_hat);
    }
    bool ground_is_simple = true;
    for (int ell = 0; ell <= lmax; ++ell)
      if (ell != pc.channel && std::abs(channels[ell](ih, ih) - pc.e_hat) <= tol) ground_is_simple = false;
    if (pc.channel == 0 && ground_is_simple) {
      const double vhh = v_coefficient(model, a_hat, a_hat);
      double sum = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        if (a == a_hat) continue;
        const double vah = v_coefficient(model, a, a_hat);
        sum += vah * vah / (vhh * vhh * std::abs(vhh - v_coefficient(model, a, a)));
      }
      pc.A2_closed_form = sum;
    }
  }
  const double e2 = pc.e_hat * pc.e_hat;
  pc.A1_plus = pc.U1_plus / e2;
  pc.A1_minus = pc.U1_minus / e2;
  pc.A2 = pc.U2 / e2;
  return pc;
}

double fermi_min_eigenvalue(const ModelInstance& model, double kappa, int ell_max) {
  const int lmax = max_channel(model.dimension, ell_max);
  double best = 0.0;
  for (int ell = 0; ell <= lmax; ++ell) {
    Eigen::MatrixXd m = fermi_channel_matrix(model, ell);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (i != j) m(i, j) *= kappa;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const double v = es.eigenvalues()(0);
    if (ell == 0 || v < best) best = v;
  }
  return best;
}

double v_min_two_band(const ModelInstance& model, double kappa) {
  if (model.n_bands() != 2) throw ConfigError("v_min_two_band requires exactly two bands");
  const double v11 = v_coefficient(model, 0, 0);
  const double v22 = v_coefficient(model, 1, 1);
  const double v12 = v_coefficient(model, 0, 1);
  const double half_diff = 0.5 * (v11 - v22);
  return 0.5 * (v11 + v22) - std::sqrt(half_diff * half_diff + kappa * kappa * v12 * v12);
}

}  // namespace mbcs
