#pragma once

// Built-in invariant suite behind the `check` command.

#include <string>
#include <vector>

#include "mbcs/model.hpp"

namespace mbcs {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
};

/// Trace identity, j_d against its defining integral, grid measure and
/// K_T-integral reproduction. Uses `model` when given, else a built-in
/// single-band gaussian model.
std::vector<CheckResult> run_builtin_checks(const ModelInstance* model = nullptr);

ModelInstance builtin_reference_model();

}  // namespace mbcs
