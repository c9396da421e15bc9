#pragma once

// Physical model of an n-band BCS system: Sommerfeld dispersions, radial
// interaction potentials and the (lambda, kappa) coupling scaling.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mbcs {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sommerfeld band eps(p) = p^2/(2m) - mu.
struct BandDispersion {
  double mass = 0.5;
  double chemical_potential = 1.0;

  double fermi_momentum() const { return std::sqrt(2.0 * mass * chemical_potential); }
  /// |grad eps| on the Fermi sphere.
  double fermi_velocity() const { return fermi_momentum() / mass; }
};

double dispersion_eval(const BandDispersion& band, double p);

enum class PotentialFamily { gaussian, exponential };

std::string_view family_name(PotentialFamily family);
PotentialFamily parse_family(std::string_view name);

/// Radial two-body potential.
///   gaussian:    V(x) = strength * exp(-|x|^2 / (2 range^2))
///   exponential: V(x) = strength * exp(-|x| / range)
struct RadialPotential {
  PotentialFamily family = PotentialFamily::gaussian;
  double strength = 0.0;
  double range = 1.0;

  bool is_zero() const { return strength == 0.0; }
  double real_space(double r) const;
  bool operator==(const RadialPotential&) const = default;
};

/// Fourier transform with the (2 pi)^{-d/2} prefactor, as a function of |p|.
double potential_fourier(const RadialPotential& pot, int dimension, double r);

class InteractionMatrix {
 public:
  InteractionMatrix() = default;
  explicit InteractionMatrix(std::size_t n) : n_(n), entries_(n * n) {}

  std::size_t size() const { return n_; }
  const RadialPotential& operator()(std::size_t a, std::size_t b) const { return entries_[a * n_ + b]; }
  void set(std::size_t a, std::size_t b, const RadialPotential& v);

  bool has_offdiagonal() const;

 private:
  std::size_t n_ = 0;
  std::vector<RadialPotential> entries_;
};

struct ModelInstance {
  std::string id = "model";
  int dimension = 3;
  std::vector<BandDispersion> bands;
  InteractionMatrix interactions;

  std::size_t n_bands() const { return bands.size(); }
  double max_mu() const;
  double min_mu() const;
  double max_fermi_momentum() const;
  double min_range() const;

  /// Prefactor of V_ab in lambda V^d + kappa lambda V^od.
  static double coupling(std::size_t a, std::size_t b, double lambda, double kappa) {
    return a == b ? lambda : kappa * lambda;
  }
};

// Declarative description consumed by build_model. Band indices are 0-based.
struct BandSpec {
  double mass = 0.0;
  double mu = 0.0;
};

struct InteractionSpec {
  std::size_t a = 0;
  std::size_t b = 0;
  std::string family = "gaussian";
  double strength = 0.0;
  double range = 1.0;
};

struct ModelConfig {
  std::string id = "model";
  int dimension = 3;
  std::vector<BandSpec> bands;
  std::vector<InteractionSpec> interactions;
};

/// Validates a config and returns the immutable model. Pairs given once are
/// symmetrized; unspecified pairs are zero. Throws ConfigError.
ModelInstance build_model(const ModelConfig& config);

/// Model with interactions replaced by lambda V^d + kappa lambda V^od.
ModelInstance scaled_model(const ModelInstance& model, double lambda, double kappa);

/// TOML model file (keys: dimension, bands[].mass, bands[].mu,
/// interactions[].pair, interactions[].family, interactions[].strength,
/// interactions[].range). Pairs are 1-based in the file.
ModelConfig parse_model_config(std::string_view toml_text, std::string_view default_id = "model");
ModelConfig load_model_config(const std::filesystem::path& path);
ModelInstance load_model(const std::filesystem::path& path);

}  // namespace mbcs
