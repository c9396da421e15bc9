#include "mbcs/kernels.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "mbcs/quadrature.hpp"

namespace mbcs {

double sphere_area(int dimension) {
  switch (dimension) {
    case 1:
      return 2.0;
    case 2:
      return 2.0 * std::numbers::pi;
    case 3:
      return 4.0 * std::numbers::pi;
    default:
      throw ConfigError("dimension must be 1, 2 or 3");
  }
}

double channel_constant(int dimension) {
  return std::pow(2.0 * std::numbers::pi, -0.5 * dimension) * sphere_area(dimension);
}

int channel_degeneracy(int dimension, int ell) {
  check_channel(dimension, ell);
  switch (dimension) {
    case 1:
      return 1;
    case 2:
      return ell == 0 ? 1 : 2;
    default:
      return 2 * ell + 1;
  }
}

int max_channel(int dimension, int requested) { return dimension == 1 ? std::min(requested, 1) : requested; }

void check_channel(int dimension, int ell) {
  if (ell < 0) throw ConfigError("channel index must be nonnegative");
  if (dimension == 1 && ell > 1) throw ConfigError("d = 1 only has the channels 0 (even) and 1 (odd)");
}

double angular_average(int dimension, double y) {
  switch (dimension) {
    case 1:
      return std::cos(y);
    case 2:
      return std::cyl_bessel_j(0.0, std::abs(y));
    case 3:
      return std::abs(y) < 1e-4 ? 1.0 - y * y / 6.0 + y * y * y * y / 120.0 : std::sin(y) / y;
    default:
      throw ConfigError("dimension must be 1, 2 or 3");
  }
}

double kt_symbol_energy(double eps, double T) {
  const double x = eps / (2.0 * T);
  if (std::abs(x) < 1e-6) return 2.0 * T * (1.0 + x * x / 3.0);
  return eps / std::tanh(x);
}

double kt_symbol(const BandDispersion& band, double p, double T) {
  return kt_symbol_energy(dispersion_eval(band, p), T);
}

AngularProjector::AngularProjector(int dimension, int ell_max, int order)
    : dimension_(dimension), ell_max_(max_channel(dimension, ell_max)) {
  if (dimension < 1 || dimension > 3) throw ConfigError("dimension must be 1, 2 or 3");
  if (ell_max < 0) throw ConfigError("ell_max must be nonnegative");
  if (dimension == 1) return;
  for (int n = order / 2; n <= 8 * order; n *= 2) levels_.push_back(make_level(n));
}

AngularProjector::Level AngularProjector::make_level(int order) const {
  Level lv;
  const std::size_t nl = static_cast<std::size_t>(ell_max_) + 1;
  lv.basis.resize(nl * order);
  if (dimension_ == 3) {
    const auto& rule = gauss_legendre(order);
    lv.t = rule.nodes;
    lv.w = rule.weights;
    for (auto& w : lv.w) w *= 0.5;
    for (int k = 0; k < order; ++k) {
      const double t = lv.t[k];
      double p0 = 1.0, p1 = t;
      for (std::size_t l = 0; l < nl; ++l) {
        double val;
        if (l == 0) {
          val = 1.0;
        } else if (l == 1) {
          val = t;
        } else {
          const double p2 = ((2.0 * l - 1.0) * t * p1 - (l - 1.0) * p0) / l;
          p0 = p1;
          p1 = p2;
          val = p2;
        }
        lv.basis[l * order + k] = val;
      }
    }
  } else {
    lv.t.resize(order);
    lv.w.assign(order, 1.0 / order);
    for (int k = 0; k < order; ++k) {
      const double theta = std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order);
      lv.t[k] = std::cos(theta);
      for (std::size_t l = 0; l < nl; ++l) lv.basis[l * order + k] = std::cos(l * theta);
    }
  }
  return lv;
}

namespace {

const AngularProjector& shared_projector(int dimension, int ell_max) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<AngularProjector>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{dimension, ell_max}];
  if (!slot) slot = std::make_unique<AngularProjector>(dimension, ell_max);
  return *slot;
}

}  // namespace

double channel_kernel(const ModelInstance& model, std::size_t a, std::size_t b, int ell, double p, double q) {
  check_channel(model.dimension, ell);
  const RadialPotential& pot = model.interactions(a, b);
  if (pot.is_zero()) return 0.0;
  const int d = model.dimension;
  const auto& proj = shared_projector(d, ell);
  std::vector<double> out(static_cast<std::size_t>(ell) + 1);
  proj.project([&](double r) { return potential_fourier(pot, d, r); }, p, q, out);
  return out[ell];
}

std::size_t RadialGrid::band_of(std::size_t index) const {
  std::size_t a = 0;
  while (a + 1 < bands.size() && index >= offsets[a + 1]) ++a;
  return a;
}

ChannelKernels build_channel_kernels(const ModelInstance& model, const RadialGrid& grid, int ell_max) {
  const int d = model.dimension;
  ChannelKernels out;
  out.ell_max = max_channel(d, ell_max);
  const std::size_t nl = static_cast<std::size_t>(out.ell_max) + 1;
  const std::size_t n = grid.total_points();
  out.blocks.assign(nl, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));

  std::vector<double> nodes(n);
  std::vector<std::size_t> band(n);
  for (std::size_t a = 0; a < grid.bands.size(); ++a)
    for (std::size_t i = 0; i < grid.bands[a].nodes.size(); ++i) {
      nodes[grid.offsets[a] + i] = grid.bands[a].nodes[i];
      band[grid.offsets[a] + i] = a;
    }

  const auto& proj = shared_projector(d, out.ell_max);
  const double cd = channel_constant(d);
  std::vector<double> vals(nl);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const RadialPotential& pot = model.interactions(band[i], band[j]);
      if (pot.is_zero()) continue;
      proj.project([&](double r) { return potential_fourier(pot, d, r); }, nodes[i], nodes[j], vals);
      for (std::size_t l = 0; l < nl; ++l) {
        const double v = cd * vals[l];
        out.blocks[l](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        out.blocks[l](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
      }
    }
  }
  return out;
}

}  // namespace mbcs
