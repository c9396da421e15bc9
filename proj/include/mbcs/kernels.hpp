#pragma once

// Special functions, angular-momentum channel projections and momentum grids
// shared by the Fermi-surface operator, the Birman-Schwinger discretization
// and the gap equation.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "mbcs/model.hpp"

namespace mbcs {

/// Temperatures below T_floor * max mu are reported as "T_c = 0".
inline constexpr double kTemperatureFloor = 1e-9;

/// |S^{d-1}|: 2, 2 pi, 4 pi.
double sphere_area(int dimension);

/// (2 pi)^{-d/2} |S^{d-1}|, the constant relating channel kernels to the
/// radial Nystrom operator.
double channel_constant(int dimension);

/// Multiplicity of channel ell among the d-dimensional spherical harmonics.
int channel_degeneracy(int dimension, int ell);

/// Largest admissible channel index (d = 1 has only the even/odd sectors).
int max_channel(int dimension, int requested);

void check_channel(int dimension, int ell);

/// j_d(y): average of exp(i y p.e1) over the unit sphere.
double angular_average(int dimension, double y);

/// K_T(eps) = eps / tanh(eps / 2T), continuous at eps = 0 with value 2T.
double kt_symbol_energy(double eps, double T);
double kt_symbol(const BandDispersion& band, double p, double T);

/// Projects radial functions of |p - q| onto angular channels 0..ell_max.
/// d = 3: (1/2) int_{-1}^{1} f P_ell dt (Gauss-Legendre in t)
/// d = 2: (1/pi) int_0^pi f cos(ell theta) d theta (Gauss-Chebyshev in t)
/// d = 1: (f(|p-q|) +- f(p+q)) / 2
/// Values are normalized so that a constant f projects to itself at ell = 0.
class AngularProjector {
 public:
  AngularProjector(int dimension, int ell_max, int order = 64);

  int dimension() const { return dimension_; }
  int ell_max() const { return ell_max_; }

  /// Writes projections for ell = 0..ell_max into out. `flat(distance)`
  /// evaluates the radial function. The order is doubled until the estimates
  /// at order n/2 and n agree to 1e-9 relative to max |f|.
  template <class F>
  void project(F&& flat, double p, double q, std::span<double> out) const;

 private:
  struct Level {
    std::vector<double> t;
    std::vector<double> w;
    std::vector<double> basis;  // (ell_max+1) x size, row-major per ell
  };
  const Level& level(std::size_t i) const { return levels_[i]; }
  Level make_level(int order) const;

  int dimension_;
  int ell_max_;
  std::vector<Level> levels_;  // order/2, order, 2 order, ...
};

/// Channel-ell projection of V_ab(p - q) between spheres of radii p and q.
double channel_kernel(const ModelInstance& model, std::size_t a, std::size_t b, int ell, double p, double q);

struct GridOptions {
  int points_per_band = 192;
  double uv_cutoff_factor = 8.0;
  /// Inner half-width of the Fermi-surface panel in units of T / v_F.
  double clustering_scale = 1.0;
  /// Geometric growth of the panels away from k_F.
  double panel_ratio = 3.0;
};

struct BandGrid {
  std::vector<double> nodes;
  std::vector<double> weights;  // include the radial measure p^{d-1} dp
};

struct RadialGrid {
  std::vector<BandGrid> bands;
  double uv_cutoff = 0.0;
  double design_temperature = 0.0;
  /// Ratio of the bulk panel width to the innermost panel width.
  double clustering_scale = 0.0;
  int order = 0;
  std::vector<std::size_t> offsets;  // start of each band in the stacked index

  std::size_t total_points() const { return offsets.empty() ? 0 : offsets.back(); }
  std::size_t band_of(std::size_t index) const;
};

/// Composite Gauss-Legendre grid per band with geometric clustering around
/// k_F resolving the K_T^{-1} peak at temperature T. Throws ConfigError when
/// the clustering panel degenerates (T comparable to the bandwidth).
RadialGrid build_grid(const ModelInstance& model, double T, const GridOptions& opts = {});

/// Unscaled Nystrom kernels on a grid: entry ((a,i),(b,j)) of block ell is
/// channel_constant(d) * channel_kernel(a, b, ell, p_i, q_j).
struct ChannelKernels {
  int ell_max = 0;
  std::vector<Eigen::MatrixXd> blocks;
};

ChannelKernels build_channel_kernels(const ModelInstance& model, const RadialGrid& grid, int ell_max);

// ---------------------------------------------------------------------------

template <class F>
void AngularProjector::project(F&& flat, double p, double q, std::span<double> out) const {
  const std::size_t nl = static_cast<std::size_t>(ell_max_) + 1;
  if (dimension_ == 1) {
    const double f0 = flat(std::abs(p - q));
    const double f1 = flat(p + q);
    out[0] = 0.5 * (f0 + f1);
    if (nl > 1) out[1] = 0.5 * (f0 - f1);
    return;
  }
  const double pq2 = p * p + q * q, pq = 2.0 * p * q;
  thread_local std::vector<double> prev, cur, fvals;
  prev.resize(nl);
  cur.resize(nl);
  auto estimate = [&](const Level& lv, std::vector<double>& res) {
    fvals.resize(lv.t.size());
    double fmax = 0.0;
    for (std::size_t k = 0; k < lv.t.size(); ++k) {
      fvals[k] = flat(std::sqrt(std::max(0.0, pq2 - pq * lv.t[k])));
      fmax = std::max(fmax, std::abs(fvals[k]));
    }
    for (std::size_t l = 0; l < nl; ++l) {
      const double* b = &lv.basis[l * lv.t.size()];
      double s = 0.0;
      for (std::size_t k = 0; k < lv.t.size(); ++k) s += lv.w[k] * b[k] * fvals[k];
      res[l] = s;
    }
    return fmax;
  };
  estimate(level(0), prev);
  std::size_t i = 1;
  for (;; ++i) {
    const double fmax = estimate(level(i), cur);
    double diff = 0.0;
    for (std::size_t l = 0; l < nl; ++l) diff = std::max(diff, std::abs(cur[l] - prev[l]));
    if (diff <= 1e-9 * fmax || i + 1 == levels_.size()) break;
    std::swap(prev, cur);
  }
  for (std::size_t l = 0; l < nl; ++l) out[l] = cur[l];
}

}  // namespace mbcs
