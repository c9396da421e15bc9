#include "mbcs/gap.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>
#include <string>

namespace mbcs {

namespace {

// tanh(E / 2T) / E and its derivative in E.
double rho(double E, double T) {
  const double x = E / (2.0 * T);
  if (x < 1e-4) return (1.0 - x * x / 3.0) / (2.0 * T);
  return std::tanh(x) / E;
}

double rho_prime(double E, double T) {
  const double x = E / (2.0 * T);
  if (x < 1e-4) return (-2.0 * x / 3.0) / (4.0 * T * T);
  const double sech = 1.0 / std::cosh(x);
  return (sech * sech / (2.0 * T) - std::tanh(x) / E) / E;
}

double binary_entropy(double beta) { return std::log1p(std::exp(-beta)) + beta / (1.0 + std::exp(beta)); }

double sup(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

GapSystem::GapSystem(const ModelInstance& model, RadialGrid grid)
    : GapSystem(model, grid, build_channel_kernels(model, grid, 0)) {}

GapSystem::GapSystem(const ModelInstance& model, RadialGrid grid, const ChannelKernels& kernels)
    : model_(&model), grid_(std::move(grid)), kernel_(kernels.blocks.at(0)) {
  for (std::size_t a = 0; a < grid_.bands.size(); ++a) {
    const auto& bg = grid_.bands[a];
    for (std::size_t i = 0; i < bg.nodes.size(); ++i) {
      eps_.push_back(dispersion_eval(model.bands[a], bg.nodes[i]));
      w_.push_back(bg.weights[i]);
    }
  }
}

Eigen::MatrixXd GapSystem::coupling_matrix(double lambda, double kappa) const {
  Eigen::MatrixXd m = kernel_ * lambda;
  const std::size_t n = grid_.bands.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b)
        m.block(static_cast<Eigen::Index>(grid_.offsets[a]), static_cast<Eigen::Index>(grid_.offsets[b]),
                static_cast<Eigen::Index>(grid_.bands[a].nodes.size()),
                static_cast<Eigen::Index>(grid_.bands[b].nodes.size())) *= kappa;
  for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j) *= w_[static_cast<std::size_t>(j)];
  return m;
}

Eigen::VectorXd GapSystem::apply(const Eigen::MatrixXd& coupling, double T, const Eigen::VectorXd& delta) const {
  Eigen::VectorXd phi(delta.size());
  for (Eigen::Index i = 0; i < delta.size(); ++i) {
    const double e = eps_[static_cast<std::size_t>(i)];
    phi(i) = rho(std::hypot(e, delta(i)), T) * delta(i);
  }
  return -(coupling * phi);
}

Eigen::VectorXd gap_seed(const GapSystem& sys, double amplitude) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(sys.size()));
  std::size_t i = 0;
  for (std::size_t a = 0; a < sys.grid().bands.size(); ++a) {
    const double mu = sys.model().bands[a].chemical_potential;
    for (std::size_t k = 0; k < sys.grid().bands[a].nodes.size(); ++k, ++i) {
      const double x = sys.epsilon(i) / mu;
      d(static_cast<Eigen::Index>(i)) = amplitude * std::exp(-x * x);
    }
  }
  return d;
}

namespace {

struct Attempt {
  Eigen::VectorXd delta;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// An absolute defect below gap_tol says nothing when Delta itself is of that
// size, so convergence also needs the defect small relative to Delta.
constexpr double kRelativeDefect = 1e-10;

bool small_enough(double r, double tol, const Eigen::VectorXd& delta, double trivial) {
  const double s = sup(delta);
  return r <= tol && (r <= kRelativeDefect * s || s < trivial);
}

// Newton on F(Delta) = Delta - G(Delta) with backtracking on the sup norm.
bool newton(const GapSystem& sys, const Eigen::MatrixXd& M, double T, const GapOptions& opts, double tol,
            Attempt& at, std::vector<double>& history) {
  const Eigen::Index N = at.delta.size();
  Eigen::VectorXd F = at.delta - sys.apply(M, T, at.delta);
  double r = sup(F);
  const double trivial = opts.trivial_threshold * T;
  for (int it = 0; it < opts.newton_max; ++it) {
    if (small_enough(r, tol, at.delta, trivial)) {
      at.residual = r;
      return true;
    }
    Eigen::VectorXd dphi(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      const double e = sys.epsilon(static_cast<std::size_t>(i));
      const double D = at.delta(i);
      const double E = std::hypot(e, D);
      dphi(i) = rho(E, T) + (E > 0.0 ? D * D / E * rho_prime(E, T) : 0.0);
    }
    Eigen::MatrixXd J = M * dphi.asDiagonal();
    J.diagonal().array() += 1.0;
    const Eigen::VectorXd step = J.partialPivLu().solve(-F);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      const Eigen::VectorXd trial = at.delta + t * step;
      const Eigen::VectorXd Ft = trial - sys.apply(M, T, trial);
      const double rt = sup(Ft);
      if (rt < r) {
        at.delta = trial;
        F = Ft;
        r = rt;
        accepted = true;
        break;
      }
    }
    ++at.iterations;
    history.push_back(r);
    if (!accepted) break;
  }
  at.residual = r;
  return small_enough(r, tol, at.delta, trivial);
}

// Damped fixed-point iteration with Anderson mixing.
void fixed_point(const GapSystem& sys, const Eigen::MatrixXd& M, double T, const GapOptions& opts, double tol,
                 Attempt& at, std::vector<double>& history) {
  std::deque<Eigen::VectorXd> dx, df;
  Eigen::VectorXd x = at.delta;
  Eigen::VectorXd f = sys.apply(M, T, x) - x;
  const double trivial = opts.trivial_threshold * T;
  for (int it = 0; it < opts.max_iter; ++it) {
    const double r = sup(f);
    history.push_back(r);
    ++at.iterations;
    const double scale = sup(x);
    if (small_enough(r, tol, x, trivial) || r <= opts.newton_switch * scale || scale < 1e-3 * trivial) break;
    Eigen::VectorXd next = x + opts.damping * f;
    if (opts.anderson_depth > 0 && !df.empty()) {
      const auto m = static_cast<Eigen::Index>(df.size());
      Eigen::MatrixXd DF(x.size(), m), DX(x.size(), m);
      for (Eigen::Index k = 0; k < m; ++k) {
        DF.col(k) = df[static_cast<std::size_t>(k)];
        DX.col(k) = dx[static_cast<std::size_t>(k)];
      }
      const Eigen::VectorXd gamma = DF.colPivHouseholderQr().solve(f);
      next -= (DX + opts.damping * DF) * gamma;
    }
    const Eigen::VectorXd fn = sys.apply(M, T, next) - next;
    dx.push_back(next - x);
    df.push_back(fn - f);
    if (static_cast<int>(dx.size()) > opts.anderson_depth) {
      dx.pop_front();
      df.pop_front();
    }
    x = next;
    f = fn;
  }
  at.delta = x;
  at.residual = sup(f);
}

}  // namespace

GapSolution solve_gap(const GapSystem& sys, double T, double lambda, double kappa, double init,
                      const GapOptions& opts, const Eigen::VectorXd* seed) {
  if (!(T > 0.0)) throw SolverError("solve_gap: temperature must be positive");
  if (!(init > 0.0) && !seed) throw ConfigError("solve_gap: seed amplitude must be positive");
  if (T < sys.grid().design_temperature * (1.0 - 1e-12)) throw SolverError("solve_gap: grid too coarse for T");
  const Eigen::MatrixXd M = sys.coupling_matrix(lambda, kappa);
  const double tol = opts.gap_tol * sys.model().max_mu();
  const double trivial = opts.trivial_threshold * T;

  GapSolution sol;
  sol.T = T;
  sol.lambda = lambda;
  sol.kappa = kappa;
  double amplitude = init;
  for (int attempt = 0; attempt <= opts.restarts; ++attempt) {
    Attempt at;
    if (seed && attempt == 0) {
      at.delta = *seed;
    } else {
      at.delta = gap_seed(sys, amplitude);
      fixed_point(sys, M, T, opts, tol, at, sol.residual_history);
    }
    bool ok;
    if (sup(at.delta) < trivial) {
      at.delta.setZero();
      at.residual = 0.0;
      ok = true;
    } else {
      ok = newton(sys, M, T, opts, tol, at, sol.residual_history);
      if (ok && sup(at.delta) < trivial) {
        at.delta.setZero();
        at.residual = 0.0;
      }
    }
    sol.iterations += at.iterations;
    sol.delta = at.delta;
    sol.residual = at.residual;
    sol.converged = ok;
    sol.trivial = sup(at.delta) == 0.0;
    sol.restarts_used = attempt;
    if (!(sol.trivial && opts.expect_nontrivial)) break;
    amplitude = (seed && attempt == 0 ? std::max(init, sup(*seed)) : amplitude) * 10.0;
  }
  if (!sol.converged)
    throw SolverError("solve_gap: no convergence after restarts (residual " + std::to_string(sol.residual) + ")");
  // Positive gauge: the s-wave gap is defined up to a global sign.
  if (!sol.trivial && sol.delta.sum() < 0.0) sol.delta = -sol.delta;
  return sol;
}

GapSolution solve_gap(const ModelInstance& model, const RadialGrid& grid, double T, double lambda, double kappa,
                      double init, const GapOptions& opts) {
  return solve_gap(GapSystem(model, grid), T, lambda, kappa, init, opts);
}

double gap_defect(const GapSystem& sys, double T, double lambda, double kappa, const Eigen::VectorXd& delta) {
  if (static_cast<std::size_t>(delta.size()) != sys.size()) throw ConfigError("gap_defect: Delta does not match the grid");
  return sup(delta - sys.apply(sys.coupling_matrix(lambda, kappa), T, delta));
}

double euler_lagrange_residual(const GapSystem& sys, double T, double lambda, double kappa,
                               const Eigen::VectorXd& delta) {
  if (static_cast<std::size_t>(delta.size()) != sys.size())
    throw ConfigError("euler_lagrange_residual: Delta does not match the grid");
  const Eigen::Index N = delta.size();
  Eigen::VectorXd alpha(N), k_alpha(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double E = std::hypot(sys.epsilon(static_cast<std::size_t>(i)), delta(i));
    alpha(i) = 0.5 * rho(E, T) * delta(i);
    k_alpha(i) = alpha(i) / rho(E, T);  // K_T^Delta = E / tanh(E/2T)
  }
  // (V alpha)^ = (2 pi)^{-d/2} V^ * alpha^
  const Eigen::VectorXd v_alpha = sys.coupling_matrix(lambda, kappa) * alpha;
  return sup(k_alpha + v_alpha);
}

double free_energy_density(const GapSystem& sys, double T, double lambda, double kappa, const Eigen::VectorXd& delta) {
  if (static_cast<std::size_t>(delta.size()) != sys.size())
    throw ConfigError("free_energy_density: Delta does not match the grid");
  const double area = sphere_area(sys.model().dimension);
  const Eigen::Index N = delta.size();
  Eigen::VectorXd alpha(N);
  double kinetic_entropy = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const double e = sys.epsilon(si);
    const double D = delta(i);
    alpha(i) = 0.0;
    if (D == 0.0) continue;
    const double E = std::hypot(e, D);
    alpha(i) = 0.5 * rho(E, T) * D;
    // gamma_Delta - gamma_0 = (tanh(eps/2T) - eps tanh(E/2T)/E) / 2
    const double dgamma = 0.5 * (std::tanh(e / (2.0 * T)) - e * rho(E, T));
    const double dentropy = binary_entropy(E / T) - binary_entropy(std::abs(e) / T);
    kinetic_entropy += sys.weight(si) * (e * dgamma - T * dentropy);
  }
  const Eigen::MatrixXd M = sys.coupling_matrix(lambda, kappa);
  const Eigen::VectorXd m_alpha = M * alpha;
  double interaction = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) interaction += sys.weight(static_cast<std::size_t>(i)) * alpha(i) * m_alpha(i);
  return area * (kinetic_entropy + interaction);
}

GapTcResult gap_critical_temperature(const GapSystem& sys, double lambda, double kappa, double T_lo, double T_hi,
                                     double rel_tol, const GapOptions& opts) {
  GapTcResult out;
  GapOptions o = opts;
  o.expect_nontrivial = false;
  GapSolution best = solve_gap(sys, T_lo, lambda, kappa, 0.1 * sys.model().max_mu(), [&] {
    GapOptions s = opts;
    s.expect_nontrivial = true;
    return s;
  }());
  if (best.trivial) throw SolverError("gap_critical_temperature: trivial solution at the lower bracket end");
  const GapSolution top = solve_gap(sys, T_hi, lambda, kappa, 0.1 * sys.model().max_mu(), o, &best.delta);
  if (!top.trivial) throw SolverError("gap_critical_temperature: nontrivial solution at the upper bracket end");
  double lo = T_lo, hi = T_hi;
  while (hi / lo - 1.0 > rel_tol) {
    const double mid = std::sqrt(lo * hi);
    const GapSolution s = solve_gap(sys, mid, lambda, kappa, 0.1 * sys.model().max_mu(), o, &best.delta);
    ++out.iterations;
    if (s.trivial) {
      hi = mid;
    } else {
      lo = mid;
      best = s;
    }
  }
  out.found = true;
  out.T_lo = lo;
  out.T_hi = hi;
  out.tc = std::sqrt(lo * hi);
  return out;
}

void write_gap_csv(std::ostream& os, const GapSystem& sys, const GapSolution& sol) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "# T=%.17g\n# lambda=%.17g\n# kappa=%.17g\n# residual=%.17g\n# iterations=%d\n",
                sol.T, sol.lambda, sol.kappa, sol.residual, sol.iterations);
  os << buf << "band,p,delta,epsilon,E\n";
  const auto& grid = sys.grid();
  for (std::size_t a = 0; a < grid.bands.size(); ++a)
    for (std::size_t i = 0; i < grid.bands[a].nodes.size(); ++i) {
      const std::size_t k = grid.offsets[a] + i;
      const double D = sol.delta.size() ? sol.delta(static_cast<Eigen::Index>(k)) : 0.0;
      const double e = sys.epsilon(k);
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", a + 1, grid.bands[a].nodes[i], D, e,
                    std::hypot(e, D));
      os << buf;
    }
}

}  // namespace mbcs
