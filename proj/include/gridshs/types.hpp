#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace gridshs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using ComplexList = std::vector<Complex>;

/// Contingency class. The numeric values are the dataset labels.
enum class ScenarioClass : int {
  Normal = 0,
  Physical = 1,
  Control = 2,
  Measurement = 3,
};

inline constexpr int kClassCount = 4;

std::string_view to_string(ScenarioClass c);
std::optional<ScenarioClass> parse_scenario_class(std::string_view name);

inline int label_of(ScenarioClass c) { return static_cast<int>(c); }
ScenarioClass class_from_label(int label);

}  // namespace gridshs
