#pragma once

#include <filesystem>
#include <string>

#include "mbcs/model.hpp"

namespace test {

inline std::filesystem::path source_dir() { return MBCS_SOURCE_DIR; }

inline mbcs::ModelInstance reference_model(const std::string& name) {
  return mbcs::load_model(source_dir() / "models" / (name + ".toml"));
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Single band m = 0.5, mu = 1, one gaussian, any dimension.
inline mbcs::ModelInstance one_band(int d, double g = -1.0, double s = 1.0, const std::string& family = "gaussian") {
  mbcs::ModelConfig c;
  c.dimension = d;
  c.bands = {{0.5, 1.0}};
  c.interactions = {{0, 0, family, g, s}};
  return mbcs::build_model(c);
}

}  // namespace test
