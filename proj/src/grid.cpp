#include <algorithm>
#include <cmath>
#include <sstream>

#include "mbcs/kernels.hpp"
#include "mbcs/quadrature.hpp"

namespace mbcs {

namespace {

struct Panel {
  double lo, hi;
};

// Panels for one band: an inner panel of half-width h0 around kf, geometric
// panels on both sides out to |p - kf| ~ kf/2, then a left tail and bulk
// panels up to the cutoff.
std::vector<Panel> band_panels(double kf, double h0, double ratio, double cutoff, double max_width) {
  std::vector<double> dist{h0};
  while (dist.back() < 0.5 * kf) dist.push_back(dist.back() * ratio);
  dist.back() = std::min(dist.back(), 0.75 * kf);

  std::vector<Panel> panels;
  panels.push_back({0.0, kf - dist.back()});
  for (std::size_t j = dist.size() - 1; j > 0; --j) panels.push_back({kf - dist[j], kf - dist[j - 1]});
  panels.push_back({kf - h0, kf + h0});
  for (std::size_t j = 1; j < dist.size(); ++j) panels.push_back({kf + dist[j - 1], kf + dist[j]});

  double x = kf + dist.back();
  double width = dist.back() - dist[dist.size() - 2];
  while (x < cutoff) {
    width = std::min(width * ratio, max_width);
    double next = x + width;
    if (cutoff - next < 0.5 * width) next = cutoff;
    panels.push_back({x, next});
    x = next;
  }
  return panels;
}

}  // namespace

RadialGrid build_grid(const ModelInstance& model, double T, const GridOptions& opts) {
  if (!(T > 0.0)) throw ConfigError("build_grid: temperature must be positive");
  if (opts.points_per_band < 16) throw ConfigError("build_grid: points_per_band must be at least 16");
  if (!(opts.uv_cutoff_factor > 1.5)) throw ConfigError("build_grid: uv_cutoff_factor must exceed 1.5");
  if (!(opts.panel_ratio > 1.0)) throw ConfigError("build_grid: panel_ratio must exceed 1");
  if (!(opts.clustering_scale > 0.0)) throw ConfigError("build_grid: clustering_scale must be positive");

  const int d = model.dimension;
  RadialGrid grid;
  grid.design_temperature = std::max(T, kTemperatureFloor * model.max_mu());
  grid.uv_cutoff = opts.uv_cutoff_factor * model.max_fermi_momentum();
  const double max_width = std::min(2.0 * model.max_fermi_momentum(), 1.5 / model.min_range());

  std::vector<std::vector<Panel>> all;
  std::size_t max_panels = 0;
  double min_inner = grid.uv_cutoff;
  for (std::size_t a = 0; a < model.n_bands(); ++a) {
    const auto& band = model.bands[a];
    const double kf = band.fermi_momentum();
    const double h0 = opts.clustering_scale * grid.design_temperature / band.fermi_velocity();
    if (h0 >= 0.25 * kf) {
      std::ostringstream os;
      os << "build_grid: clustering panel degenerates for band " << a + 1 << " (T = " << T
         << " is comparable to the bandwidth mu = " << band.chemical_potential << ")";
      throw ConfigError(os.str());
    }
    all.push_back(band_panels(kf, h0, opts.panel_ratio, grid.uv_cutoff, max_width));
    max_panels = std::max(max_panels, all.back().size());
    min_inner = std::min(min_inner, 2.0 * h0);
  }
  grid.order = std::max(6, opts.points_per_band / static_cast<int>(max_panels));
  grid.clustering_scale = max_width / min_inner;

  const auto& rule = gauss_legendre(grid.order);
  grid.offsets.push_back(0);
  for (const auto& panels : all) {
    BandGrid bg;
    for (const auto& pn : panels) {
      const double half = 0.5 * (pn.hi - pn.lo), mid = 0.5 * (pn.hi + pn.lo);
      for (std::size_t k = 0; k < rule.size(); ++k) {
        const double p = mid + half * rule.nodes[k];
        bg.nodes.push_back(p);
        bg.weights.push_back(half * rule.weights[k] * std::pow(p, d - 1));
      }
    }
    grid.offsets.push_back(grid.offsets.back() + bg.nodes.size());
    grid.bands.push_back(std::move(bg));
  }
  return grid;
}

}  // namespace mbcs
