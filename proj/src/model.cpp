#include "mbcs/model.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <sstream>

namespace mbcs {

double dispersion_eval(const BandDispersion& band, double p) {
  return p * p / (2.0 * band.mass) - band.chemical_potential;
}

std::string_view family_name(PotentialFamily family) {
  switch (family) {
    case PotentialFamily::gaussian:
      return "gaussian";
    case PotentialFamily::exponential:
      return "exponential";
  }
  return "unknown";
}

PotentialFamily parse_family(std::string_view name) {
  if (name == "gaussian") return PotentialFamily::gaussian;
  if (name == "exponential") return PotentialFamily::exponential;
  throw ConfigError("unknown potential family '" + std::string(name) + "'");
}

double RadialPotential::real_space(double r) const {
  if (strength == 0.0) return 0.0;
  switch (family) {
    case PotentialFamily::gaussian:
      return strength * std::exp(-r * r / (2.0 * range * range));
    case PotentialFamily::exponential:
      return strength * std::exp(-r / range);
  }
  return 0.0;
}

double potential_fourier(const RadialPotential& pot, int dimension, double r) {
  if (pot.strength == 0.0) return 0.0;
  const double s = pot.range;
  const double sr2 = s * s * r * r;
  switch (pot.family) {
    case PotentialFamily::gaussian:
      return pot.strength * std::pow(s, dimension) * std::exp(-0.5 * sr2);
    case PotentialFamily::exponential: {
      const double c = std::sqrt(2.0 / std::numbers::pi);
      switch (dimension) {
        case 1:
          return pot.strength * c * s / (1.0 + sr2);
        case 2:
          return pot.strength * s * s / std::pow(1.0 + sr2, 1.5);
        case 3: {
          const double den = 1.0 + sr2;
          return pot.strength * 2.0 * c * s * s * s / (den * den);
        }
        default:
          break;
      }
      break;
    }
  }
  throw ConfigError("potential_fourier: unsupported dimension");
}

void InteractionMatrix::set(std::size_t a, std::size_t b, const RadialPotential& v) {
  entries_[a * n_ + b] = v;
  entries_[b * n_ + a] = v;
}

bool InteractionMatrix::has_offdiagonal() const {
  for (std::size_t a = 0; a < n_; ++a)
    for (std::size_t b = 0; b < n_; ++b)
      if (a != b && !(*this)(a, b).is_zero()) return true;
  return false;
}

double ModelInstance::max_mu() const {
  double m = 0.0;
  for (const auto& b : bands) m = std::max(m, b.chemical_potential);
  return m;
}

double ModelInstance::min_mu() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : bands) m = std::min(m, b.chemical_potential);
  return m;
}

double ModelInstance::max_fermi_momentum() const {
  double k = 0.0;
  for (const auto& b : bands) k = std::max(k, b.fermi_momentum());
  return k;
}

double ModelInstance::min_range() const {
  double s = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n_bands(); ++a)
    for (std::size_t b = 0; b < n_bands(); ++b)
      if (!interactions(a, b).is_zero()) s = std::min(s, interactions(a, b).range);
  return std::isfinite(s) ? s : 1.0;
}

ModelInstance build_model(const ModelConfig& config) {
  if (config.dimension < 1 || config.dimension > 3)
    throw ConfigError("dimension must be 1, 2 or 3 (got " + std::to_string(config.dimension) + ")");
  if (config.bands.empty()) throw ConfigError("model needs at least one band");

  ModelInstance model;
  model.id = config.id;
  model.dimension = config.dimension;
  const std::size_t n = config.bands.size();
  for (std::size_t a = 0; a < n; ++a) {
    const auto& b = config.bands[a];
    const std::string name = "band " + std::to_string(a + 1);
    if (!(b.mass > 0.0) || !std::isfinite(b.mass)) throw ConfigError(name + ": mass must be positive");
    if (!(b.mu > 0.0) || !std::isfinite(b.mu))
      throw ConfigError(name + ": chemical potential must be positive (empty Fermi surface)");
    BandDispersion band{b.mass, b.mu};
    if (!(band.fermi_momentum() > 0.0) || !std::isfinite(band.fermi_momentum()))
      throw ConfigError(name + ": Fermi momentum is not finite and positive");
    model.bands.push_back(band);
  }

  model.interactions = InteractionMatrix(n);
  std::vector<bool> seen(n * n, false);
  for (const auto& spec : config.interactions) {
    if (spec.a >= n || spec.b >= n) throw ConfigError("interaction pair references a nonexistent band");
    RadialPotential v{parse_family(spec.family), spec.strength, spec.range};
    if (!std::isfinite(v.strength)) throw ConfigError("interaction strength must be finite");
    if (!(v.range > 0.0) || !std::isfinite(v.range)) throw ConfigError("interaction range must be positive");
    const bool forward = seen[spec.a * n + spec.b];
    const bool backward = seen[spec.b * n + spec.a];
    if (forward || backward) {
      if (!(model.interactions(spec.a, spec.b) == v)) {
        std::ostringstream os;
        os << "asymmetric interaction specification for pair (" << spec.a + 1 << "," << spec.b + 1 << ")";
        throw ConfigError(os.str());
      }
      continue;
    }
    model.interactions.set(spec.a, spec.b, v);
    seen[spec.a * n + spec.b] = true;
    seen[spec.b * n + spec.a] = true;
  }
  return model;
}

ModelInstance scaled_model(const ModelInstance& model, double lambda, double kappa) {
  ModelInstance out = model;
  const std::size_t n = model.n_bands();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      RadialPotential v = model.interactions(a, b);
      v.strength *= ModelInstance::coupling(a, b, lambda, kappa);
      out.interactions.set(a, b, v);
    }
  return out;
}

}  // namespace mbcs
