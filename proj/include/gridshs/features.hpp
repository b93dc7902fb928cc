#pragma once

#include <optional>

#include "gridshs/sim_engine.hpp"
#include "gridshs/types.hpp"

namespace gridshs::features {

inline constexpr double kDefaultEpsilon = 1e-12;

/// e(l, i) = |monitored(l, i) - nominal(l, i)|.
struct ErrorWindow {
  Matrix e;
  int window = 0;
};

/// E_i = ln(sum_l e(l, i) + eps), one entry per output column.
struct FeatureVector {
  Vector E;
  int window = 0;
  std::optional<ScenarioClass> label;
};

ErrorWindow error_window(const sim::OutputTrace& monitored, const sim::OutputTrace& nominal);

FeatureVector aggregate(const ErrorWindow& errors, double epsilon = kDefaultEpsilon);

/// Column-major flattening of e (all samples of output 1, then output 2, ...),
/// the raw sequence export.
Vector raw_sequence(const ErrorWindow& errors);

}  // namespace gridshs::features
