#include "gridshs/features.hpp"

#include <cmath>

#include "gridshs/error.hpp"

namespace gridshs::features {

ErrorWindow error_window(const sim::OutputTrace& monitored, const sim::OutputTrace& nominal) {
  if (monitored.samples.rows() != nominal.samples.rows() ||
      monitored.samples.cols() != nominal.samples.cols()) {
    throw Error(ErrorCategory::dimension_mismatch, "monitored and nominal traces differ in shape");
  }
  if (monitored.window != nominal.window) {
    throw Error(ErrorCategory::invalid_input, "monitored and nominal traces come from different windows");
  }
  return {(monitored.samples - nominal.samples).cwiseAbs(), monitored.window};
}

FeatureVector aggregate(const ErrorWindow& errors, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCategory::invalid_input, "epsilon must be > 0");
  FeatureVector f;
  f.window = errors.window;
  f.E = (errors.e.colwise().sum().array() + epsilon).log().transpose();
  return f;
}

Vector raw_sequence(const ErrorWindow& errors) {
  return Eigen::Map<const Vector>(errors.e.data(), errors.e.size());
}

}  // namespace gridshs::features
