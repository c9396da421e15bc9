#include <cmath>
#include <numbers>

#include "mbcs/quadrature.hpp"
#include "mbcs/spectral.hpp"

namespace mbcs {

namespace {

// Radial part of the Fourier transform in channel ell: a channel-ell
// function f(r) maps to g(p) = int H(p r) f(r) r^{d-1} dr.
double hankel_kernel(int d, int ell, double x) {
  const double c = std::sqrt(2.0 / std::numbers::pi);
  switch (d) {
    case 1:
      return ell == 0 ? c * std::cos(x) : c * std::sin(x);
    case 2:
      return std::cyl_bessel_j(static_cast<double>(ell), x);
    default:
      return c * std::sph_bessel(static_cast<unsigned>(ell), x);
  }
}

struct PositionGrid {
  std::vector<double> r;
  std::vector<double> w;  // include r^{d-1}
};

PositionGrid position_grid(const ModelInstance& model, double uv_cutoff) {
  double reach = 0.0, s_min = 0.0;
  bool any = false;
  for (std::size_t a = 0; a < model.n_bands(); ++a)
    for (std::size_t b = 0; b < model.n_bands(); ++b) {
      const auto& pot = model.interactions(a, b);
      if (pot.is_zero()) continue;
      // |V|^{1/2} decays like exp(-r^2 / 4 s^2) or exp(-r / 2 s)
      reach = std::max(reach, pot.family == PotentialFamily::gaussian ? 12.0 * pot.range : 60.0 * pot.range);
      s_min = any ? std::min(s_min, pot.range) : pot.range;
      any = true;
    }
  PositionGrid g;
  if (!any) return g;
  const double h = std::min(0.5 * s_min, 2.0 / uv_cutoff);
  const int panels = static_cast<int>(std::ceil(reach / h));
  const int order = 8;
  const auto& rule = gauss_legendre(order);
  const double width = reach / panels;
  for (int k = 0; k < panels; ++k) {
    const double mid = (k + 0.5) * width;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double r = mid + 0.5 * width * rule.nodes[i];
      g.r.push_back(r);
      g.w.push_back(0.5 * width * rule.weights[i] * std::pow(r, model.dimension - 1));
    }
  }
  return g;
}

}  // namespace

SingularSplit singular_split(const ModelInstance& model, const RadialGrid& grid, double T, double lambda,
                             double kappa, double T0, int ell) {
  check_channel(model.dimension, ell);
  if (!(T > 0.0) || !(T0 > 0.0)) throw SolverError("singular_split: temperatures must be positive");
  if (T < grid.design_temperature * (1.0 - 1e-12)) throw SolverError("singular_split: grid too coarse for T");
  const int d = model.dimension;
  const std::size_t n = model.n_bands();
  const PositionGrid xg = position_grid(model, grid.uv_cutoff);
  SingularSplit out;
  out.log_factor = std::log(T0 / T);
  out.radial_points = xg.r.size();
  if (xg.r.empty() || lambda == 0.0) return out;
  const auto nx = static_cast<Eigen::Index>(xg.r.size());

  // Pointwise |lambda V_kappa(r)|^{1/2}, one n x n matrix per node.
  std::vector<Eigen::MatrixXd> root(xg.r.size());
  for (std::size_t k = 0; k < xg.r.size(); ++k) {
    Eigen::MatrixXd v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        v(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            ModelInstance::coupling(a, b, lambda, kappa) * model.interactions(a, b).real_space(xg.r[k]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v);
    root[k] = es.eigenvectors() * es.eigenvalues().cwiseAbs().cwiseSqrt().asDiagonal() *
              es.eigenvectors().transpose();
  }

  // Per band: K_T^{-1} and its Fermi-surface singular part as kernels in r.
  std::vector<Eigen::MatrixXd> full(n), remainder(n);
  for (std::size_t c = 0; c < n; ++c) {
    const auto& band = model.bands[c];
    const auto& bg = grid.bands[c];
    const auto np = static_cast<Eigen::Index>(bg.nodes.size());
    Eigen::MatrixXd H(np, nx);
    Eigen::VectorXd dk(np);
    for (Eigen::Index i = 0; i < np; ++i) {
      const double p = bg.nodes[static_cast<std::size_t>(i)];
      dk(i) = bg.weights[static_cast<std::size_t>(i)] / kt_symbol(band, p, T);
      for (Eigen::Index k = 0; k < nx; ++k)
        H(i, k) = hankel_kernel(d, ell, p * xg.r[static_cast<std::size_t>(k)]) * std::sqrt(xg.w[static_cast<std::size_t>(k)]);
    }
    full[c] = H.transpose() * dk.asDiagonal() * H;
    const double kf = band.fermi_momentum();
    Eigen::VectorXd h(nx);
    for (Eigen::Index k = 0; k < nx; ++k)
      h(k) = hankel_kernel(d, ell, kf * xg.r[static_cast<std::size_t>(k)]) * std::sqrt(xg.w[static_cast<std::size_t>(k)]);
    const double weight = 2.0 * out.log_factor * std::pow(kf, d - 1) / band.fermi_velocity();
    remainder[c] = full[c] - weight * h * h.transpose();
  }

  auto sandwich = [&](const std::vector<Eigen::MatrixXd>& g) {
    const auto N = static_cast<Eigen::Index>(n) * nx;
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(N, N);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c) {
          Eigen::VectorXd left(nx), right(nx);
          for (Eigen::Index k = 0; k < nx; ++k) {
            left(k) = root[static_cast<std::size_t>(k)](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c));
            right(k) = root[static_cast<std::size_t>(k)](static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b));
          }
          if (left.cwiseAbs().maxCoeff() == 0.0 || right.cwiseAbs().maxCoeff() == 0.0) continue;
          q.block(static_cast<Eigen::Index>(a) * nx, static_cast<Eigen::Index>(b) * nx, nx, nx) +=
              left.asDiagonal() * g[c] * right.asDiagonal();
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SolverError("singular_split: eigensolver did not converge");
    return es.eigenvalues().cwiseAbs().maxCoeff() / lambda;
  };
  out.full_norm = sandwich(full);
  out.remainder_norm = sandwich(remainder);
  return out;
}

double singular_split_norm(const ModelInstance& model, const RadialGrid& grid, double T, double lambda, double kappa,
                           double T0, int ell) {
  return singular_split(model, grid, T, lambda, kappa, T0, ell).remainder_norm;
}

}  // namespace mbcs
