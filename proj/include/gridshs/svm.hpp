#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "gridshs/dataset.hpp"
#include "gridshs/types.hpp"

namespace gridshs::learning {

struct SvmOptions {
  /// Stop when the maximal KKT violation m(alpha) - M(alpha) drops below this.
  double tolerance = 1e-3;
  /// SMO pair updates allowed per binary machine.
  std::size_t max_iterations = 1'000'000;
};

/// exp(-gamma |a - b|^2) for every row pair.
Matrix rbf_kernel(const Matrix& X1, const Matrix& X2, double gamma);

struct BinarySolution {
  Vector alpha;
  double bias = 0.0;  ///< f(x) = sum_j alpha_j y_j K(x_j, x) + bias
  std::size_t iterations = 0;
  double kkt_gap = 0.0;
};

/// SMO on the C-SVM dual with the maximal-violating-pair rule. `y` holds
/// +1/-1. Throws Error(not_converged) at the iteration cap.
BinarySolution smo_solve(const Matrix& kernel, const Vector& y, double C, const SvmOptions& options = {});

/// Dual objective 1/2 a^T Q a - sum a with Q_ij = y_i y_j K_ij.
double dual_objective(const Matrix& kernel, const Vector& y, const Vector& alpha);

/// Per-feature standardization fitted on training rows.
struct Scaler {
  Vector mean;
  Vector scale;
  static Scaler fit(const Matrix& X);
  Vector apply(const Vector& x) const;
  Matrix apply(const Matrix& X) const;
};

/// One-vs-rest machine for `positive_class`; only support vectors are kept.
struct BinaryMachine {
  int positive_class = 0;
  Matrix support;  ///< scaled support vectors
  Vector alpha;
  Vector y;
  double bias = 0.0;
  std::size_t iterations = 0;

  double decision(const Vector& scaled_x, double gamma) const;
};

struct SvmCalibration {
  bool enabled = false;
  /// p_c = 1 / (1 + exp(-(a_c f_c + b_c))).
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> theta;
  double uncalibrated_macro = 0.0;
  double calibrated_macro = 0.0;
};

struct SvmModel {
  double C = 1.0;
  double gamma = 1.0;
  Scaler scaler;
  std::vector<BinaryMachine> machines;  ///< ascending positive_class
  SvmCalibration calibration;

  std::size_t dimension() const { return static_cast<std::size_t>(scaler.mean.size()); }
};

SvmModel svm_train(const Matrix& X, const std::vector<int>& labels, double C, double gamma,
                   const SvmOptions& options = {});
SvmModel svm_train(const Dataset& data, double C, double gamma, const SvmOptions& options = {});

/// Raw one-vs-rest decision values, one per machine.
Vector svm_decision_values(const SvmModel& model, const Vector& x);

/// Calibrated argmax p_c / theta_c when calibration is enabled, otherwise
/// the largest decision value.
int svm_predict(const SvmModel& model, const Vector& x);

struct PlattSigmoid {
  double a = 1.0;
  double b = 0.0;
  double operator()(double f) const;
};

/// Maximum-likelihood sigmoid on decision values against 0/1 targets,
/// Newton with backtracking on Platt's smoothed targets.
PlattSigmoid fit_platt(const std::vector<double>& decision, const std::vector<int>& target);

/// Mean per-class recall of argmax_c p_c / theta_c over `classes`.
double macro_accuracy(const Matrix& probabilities, const std::vector<int>& labels,
                      const std::vector<int>& classes, const std::vector<double>& theta);

/// Coordinate ascent over a theta grid per class, starting from 0.5.
std::vector<double> tune_thresholds(const Matrix& probabilities, const std::vector<int>& labels,
                                    const std::vector<int>& classes);

/// Fits sigmoids and thresholds on out-of-fold decision values: the model's
/// (C, gamma) are retrained on k-1 folds and scored on the held-out fold.
/// Calibration is kept only when it does not lower macro accuracy against
/// the uncalibrated argmax on the same folds.
SvmModel svm_calibrate(const SvmModel& model, const Dataset& train, std::size_t folds,
                       std::uint64_t seed, const SvmOptions& options = {});

}  // namespace gridshs::learning
