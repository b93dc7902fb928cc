#pragma once

#include <span>
#include <vector>

#include "gridshs/control_design.hpp"
#include "gridshs/grid_model.hpp"
#include "gridshs/types.hpp"

namespace gridshs::spectral {

/// Minimum-cost perfect matching on a square cost matrix (Kuhn-Munkres).
/// Returns assignment[row] = column.
std::vector<std::size_t> hungarian_assignment(const Matrix& cost);

/// Dense eigenvalues, sorted by real part then imaginary part.
ComplexList eigenvalues(const Matrix& M);

struct SpectralSignature {
  ComplexList lambda1;  ///< eig(A + B K)
  ComplexList lambda2;  ///< eig(A + G C)
};

SpectralSignature spectral_signature(const grid::ScenarioModel& scenario,
                                     const control::GainSet& gains);

/// Minimum total |a_i - b_pi(i)| over permutations pi. Metric on equal-size multisets.
double eigenset_distance(std::span<const Complex> a, std::span<const Complex> b);

/// Largest single |a_i - b_pi(i)| under the same optimal matching.
double matched_max_deviation(std::span<const Complex> a, std::span<const Complex> b);

double spectral_radius(std::span<const Complex> values);

struct SpectralVerdict {
  ScenarioClass cls = ScenarioClass::Normal;
  double d1 = 0.0;
  double d2 = 0.0;
  double threshold1 = 0.0;
  double threshold2 = 0.0;
};

/// Which signature moved. A side counts as moved when its distance exceeds
/// tol * max(1, spectral radius of the nominal side); ties count as unmoved.
SpectralVerdict classify_by_spectra(const SpectralSignature& sig, const SpectralSignature& nominal,
                                    double tol = 1e-6);

struct RankResult {
  Matrix matrix;
  std::size_t rank = 0;
};

/// Numerical rank with threshold sigma_max * n * 1e-10.
std::size_t numerical_rank(const Matrix& M, std::size_t n);

/// [B, AB, ..., A^{n-1} B] and its rank.
RankResult controllability_rank(const Matrix& A, const Matrix& B);

/// [C; CA; ...; CA^{n-1}] and its rank.
RankResult observability_rank(const Matrix& A, const Matrix& C);

struct SensorAudit {
  std::size_t sensor = 0;
  std::size_t rank_without = 0;
};

/// Observability rank with each sensor row zeroed in turn.
std::vector<SensorAudit> sensor_loss_audit(const Matrix& A, const Matrix& C);

}  // namespace gridshs::spectral
