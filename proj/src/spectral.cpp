#include "mbcs/spectral.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <memory>
#include <sstream>

#include "mbcs/fermi_operator.hpp"

namespace mbcs {

namespace {

Eigen::VectorXd congruence_scale(const ModelInstance& model, const RadialGrid& grid, double T) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(grid.total_points()));
  for (std::size_t a = 0; a < grid.bands.size(); ++a) {
    const auto& bg = grid.bands[a];
    for (std::size_t i = 0; i < bg.nodes.size(); ++i)
      s(static_cast<Eigen::Index>(grid.offsets[a] + i)) =
          std::sqrt(bg.weights[i] / kt_symbol(model.bands[a], bg.nodes[i], T));
  }
  return s;
}

void check_temperature(const RadialGrid& grid, double T) {
  if (!(T > 0.0)) throw SolverError("operator temperature must be positive");
  if (T < grid.design_temperature * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "grid built for T >= " << grid.design_temperature << " is too coarse near k_F for T = " << T;
    throw SolverError(os.str());
  }
}

Eigen::MatrixXd scaled_block(const ModelInstance& model, const RadialGrid& grid, const Eigen::MatrixXd& kernel,
                             const Eigen::VectorXd& s, double lambda, double kappa) {
  Eigen::MatrixXd m = s.asDiagonal() * kernel * s.asDiagonal();
  m *= lambda;
  const std::size_t n = model.n_bands();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const auto ra = static_cast<Eigen::Index>(grid.offsets[a]);
      const auto rb = static_cast<Eigen::Index>(grid.offsets[b]);
      const auto na = static_cast<Eigen::Index>(grid.bands[a].nodes.size());
      const auto nb = static_cast<Eigen::Index>(grid.bands[b].nodes.size());
      m.block(ra, rb, na, nb) *= kappa;
    }
  return m;
}

double grid_design_temperature(const ModelInstance& model, const SolverOptions& opts, double T) {
  const double cap = 0.1 * model.min_mu() / opts.grid.clustering_scale;
  return std::min(T, cap);
}

}  // namespace

ChannelOperator assemble_operator(const ModelInstance& model, const RadialGrid& grid, const ChannelKernels& kernels,
                                  double T, double lambda, double kappa, int ell) {
  check_channel(model.dimension, ell);
  if (ell > kernels.ell_max) throw SolverError("channel not present in the precomputed kernels");
  check_temperature(grid, T);
  ChannelOperator op{ell, T, lambda, kappa, {}};
  op.matrix = scaled_block(model, grid, kernels.blocks[ell], congruence_scale(model, grid, T), lambda, kappa);
  return op;
}

ChannelOperator assemble_operator(const ModelInstance& model, const RadialGrid& grid, double T, double lambda,
                                  double kappa, int ell) {
  return assemble_operator(model, grid, build_channel_kernels(model, grid, ell), T, lambda, kappa, ell);
}

EigenPair min_eigenvalue(const ChannelOperator& op) {
  if (op.matrix.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix);
  if (es.info() != Eigen::Success) throw SolverError("min_eigenvalue: eigensolver did not converge");
  return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

double min_eigenvalue_only(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverError("min_eigenvalue: eigensolver did not converge");
  return es.eigenvalues()(0);
}

BirmanSchwinger::BirmanSchwinger(const ModelInstance& model, double design_temperature, const SolverOptions& opts)
    : model_(&model),
      grid_(build_grid(model, design_temperature, opts.grid)),
      kernels_(build_channel_kernels(model, grid_, opts.ell_max)) {}

double BirmanSchwinger::min_eig(double T, double lambda, double kappa, int ell) const {
  check_temperature(grid_, T);
  return min_eigenvalue_only(
      scaled_block(*model_, grid_, kernels_.blocks[ell], congruence_scale(*model_, grid_, T), lambda, kappa));
}

std::pair<double, int> BirmanSchwinger::min_eig_all(double T, double lambda, double kappa) const {
  check_temperature(grid_, T);
  const Eigen::VectorXd s = congruence_scale(*model_, grid_, T);
  std::pair<double, int> best{0.0, 0};
  for (int ell = 0; ell <= kernels_.ell_max; ++ell) {
    const double v = min_eigenvalue_only(scaled_block(*model_, grid_, kernels_.blocks[ell], s, lambda, kappa));
    if (ell == 0 || v < best.first) best = {v, ell};
  }
  return best;
}

TcResult critical_temperature_on_grid(const BirmanSchwinger& bs, double lambda, double kappa, double T_lo,
                                      double T_hi, const SolverOptions& opts) {
  TcResult res;
  res.grid_points = bs.grid().total_points();
  auto record = [&](double T, double v) { res.min_eig_trajectory.emplace_back(T, v); };

  const auto lo_all = bs.min_eig_all(T_lo, lambda, kappa);
  record(T_lo, lo_all.first);
  if (!(lo_all.first < -1.0)) throw SolverError("critical_temperature_on_grid: min eig >= -1 at the lower bracket end");
  int ell = lo_all.second;
  double lo = T_lo, hi = T_hi;

  while (true) {
    auto g = [&](double u) {
      const double T = std::exp(u);
      const double v = bs.min_eig(T, lambda, kappa, ell);
      record(T, v);
      ++res.iterations;
      return v + 1.0;
    };
    const double ulo = std::log(lo), uhi = std::log(hi);
    const double glo = bs.min_eig(lo, lambda, kappa, ell) + 1.0;
    const double ghi = bs.min_eig(hi, lambda, kappa, ell) + 1.0;
    double root_lo = ulo, root_hi = uhi;
    if (ghi <= 0.0) {
      root_lo = root_hi = uhi;
    } else {
      const double width = std::min(1e-10, 0.01 * opts.bisect_tol);
      auto tol = [width](double a, double b) { return std::abs(b - a) <= width; };
      std::uintmax_t max_iter = static_cast<std::uintmax_t>(opts.max_iterations);
      const auto r = boost::math::tools::toms748_solve(g, ulo, uhi, glo, ghi, tol, max_iter);
      root_lo = r.first;
      root_hi = r.second;
    }
    const double tc = std::exp(0.5 * (root_lo + root_hi));
    // Another channel may still be superconducting just above this root.
    const auto above = bs.min_eig_all(tc * (1.0 + 2.0 * opts.bisect_tol), lambda, kappa);
    if (above.first < -1.0 && above.second != ell) {
      ell = above.second;
      lo = tc * (1.0 + 2.0 * opts.bisect_tol);
      continue;
    }
    res.found = true;
    res.tc = tc;
    res.T_lo = std::exp(root_lo);
    res.T_hi = std::exp(root_hi);
    res.channel_of_minimum = ell;
    res.min_eig_at_tc = bs.min_eig(tc, lambda, kappa, ell);
    const double below = bs.min_eig_all(tc * (1.0 - 2.0 * opts.bisect_tol), lambda, kappa).first;
    res.certified = below < -1.0 && above.first > -1.0;
    return res;
  }
}

TcResult critical_temperature(const ModelInstance& model, double lambda, double kappa, const SolverOptions& opts) {
  if (!(lambda > 0.0)) throw ConfigError("critical_temperature: lambda must be positive");
  const double mu = model.max_mu();
  const double t_floor = opts.t_floor * mu;
  const double t_ceiling = opts.t_ceiling * mu;
  const double cap = grid_design_temperature(model, opts, t_ceiling);

  double start = cap;
  if (opts.t_hint) {
    start = std::clamp(*opts.t_hint, t_floor, cap);
  } else {
    const double e = fermi_min_eigenvalue(model, kappa, std::max(opts.ell_max, 0));
    if (e < 0.0) start = std::clamp(4.0 * mu * std::exp(1.0 / (lambda * e)), t_floor, cap);
  }

  std::vector<std::pair<double, double>> trajectory;
  auto bs = std::make_unique<BirmanSchwinger>(model, grid_design_temperature(model, opts, start), opts);
  double T = start;
  double v = bs->min_eig_all(T, lambda, kappa).first;
  trajectory.emplace_back(T, v);

  double T_lo = 0.0, T_hi = 0.0;
  if (v < -1.0) {
    while (v < -1.0) {
      T_lo = T;
      T *= 2.0;
      if (T > t_ceiling) {
        std::ostringstream os;
        os << "critical_temperature: min eig still below -1 at T_ceiling = " << t_ceiling << " (min eig " << v
           << "); the couplings are outside the weak-coupling regime";
        throw SolverError(os.str());
      }
      v = bs->min_eig_all(T, lambda, kappa).first;
      trajectory.emplace_back(T, v);
    }
    T_hi = T;
  } else {
    while (v >= -1.0) {
      T_hi = T;
      if (T <= t_floor) {
        TcResult res;
        res.found = false;
        res.T_lo = 0.0;
        res.T_hi = t_floor;
        res.min_eig_trajectory = std::move(trajectory);
        res.grid_points = bs->grid().total_points();
        res.min_eig_at_tc = v;
        res.certified = true;
        return res;
      }
      T = std::max(T / 4.0, t_floor);
      bs = std::make_unique<BirmanSchwinger>(model, T, opts);
      v = bs->min_eig_all(T, lambda, kappa).first;
      trajectory.emplace_back(T, v);
    }
    T_lo = T;
  }
  // Give the lower certificate point some room on the same grid.
  if (bs->grid().design_temperature > T_lo * (1.0 - 4.0 * opts.bisect_tol))
    bs = std::make_unique<BirmanSchwinger>(model, T_lo * (1.0 - 4.0 * opts.bisect_tol), opts);
  TcResult res = critical_temperature_on_grid(*bs, lambda, kappa, T_lo, T_hi, opts);
  trajectory.insert(trajectory.end(), res.min_eig_trajectory.begin(), res.min_eig_trajectory.end());
  res.min_eig_trajectory = std::move(trajectory);
  return res;
}

KappaProbe::KappaProbe(const ModelInstance& model, double lambda, const SolverOptions& opts) : lambda_(lambda) {
  reference_ = critical_temperature(model, lambda, 0.0, opts);
  reference_found_ = reference_.found;
  T_ = reference_found_ ? reference_.tc : opts.t_floor * model.max_mu();
  bs_.emplace(model, grid_design_temperature(model, opts, T_), opts);
}

double KappaProbe::operator()(double kappa) const { return bs_->min_eig_all(T_, lambda_, kappa).first + 1.0; }

KappaThresholds kappa_thresholds(const KappaProbe& probe, const SolverOptions& opts) {
  KappaThresholds out;
  out.reference_found = probe.reference_found();
  out.reference_temperature = probe.temperature();
  out.crossing_level = 10.0 * opts.eig_tol;
  // Without a reference T_c the probe sits at T_floor, where f(0) > 0.
  auto crosses = [&](double kappa) { return probe(kappa) < -out.crossing_level; };

  for (int side : {+1, -1}) {
    double prev = 0.0;
    double k = opts.kappa_scan_min;
    bool found = false;
    while (k <= opts.kappa_scan_max * (1.0 + 1e-12)) {
      if (crosses(side * k)) {
        found = true;
        break;
      }
      prev = k;
      if (k == opts.kappa_scan_max) break;
      k = std::min(2.0 * k, opts.kappa_scan_max);
    }
    double value = 0.0;
    if (found) {
      double lo = prev, hi = k;
      while (hi - lo > opts.bisect_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        (crosses(side * mid) ? hi : lo) = mid;
      }
      value = 0.5 * (lo + hi);
    }
    if (side > 0) {
      out.plus = value;
      out.plus_infinite = !found;
    } else {
      out.minus = value;
      out.minus_infinite = !found;
    }
  }
  return out;
}

KappaThresholds kappa_thresholds(const ModelInstance& model, double lambda, const SolverOptions& opts) {
  return kappa_thresholds(KappaProbe(model, lambda, opts), opts);
}

}  // namespace mbcs
