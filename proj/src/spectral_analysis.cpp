#include "gridshs/spectral_analysis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "gridshs/error.hpp"

namespace gridshs::spectral {
namespace {

Matrix distance_matrix(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCategory::dimension_mismatch, "eigenvalue sets differ in size");
  }
  const auto n = static_cast<Eigen::Index>(a.size());
  Matrix cost(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) cost(i, j) = std::abs(a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(j)]);
  }
  return cost;
}

}  // namespace

ComplexList eigenvalues(const Matrix& M) {
  if (M.rows() != M.cols()) throw Error(ErrorCategory::dimension_mismatch, "eigenvalues of non-square matrix");
  if (M.rows() == 0) return {};
  Eigen::EigenSolver<Matrix> solver(M, false);
  if (solver.info() != Eigen::Success) throw Error(ErrorCategory::numerical, "eigensolver failed");
  ComplexList out(solver.eigenvalues().begin(), solver.eigenvalues().end());
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

SpectralSignature spectral_signature(const grid::ScenarioModel& scenario,
                                     const control::GainSet& gains) {
  if (gains.K.cols() != scenario.A.rows() || gains.K.rows() != scenario.B.cols() ||
      gains.G.rows() != scenario.A.rows() || gains.G.cols() != scenario.C.rows()) {
    throw Error(ErrorCategory::dimension_mismatch, "gains do not match scenario dimensions");
  }
  // Same expression order as control::build_closed_loop, so unperturbed
  // blocks are bit-identical across scenarios.
  const Matrix BK = scenario.B * gains.K;
  SpectralSignature sig;
  sig.lambda1 = eigenvalues(scenario.A + BK);
  sig.lambda2 = eigenvalues(scenario.A + gains.G * scenario.C);
  return sig;
}

double eigenset_distance(std::span<const Complex> a, std::span<const Complex> b) {
  const Matrix cost = distance_matrix(a, b);
  const auto assignment = hungarian_assignment(cost);
  double total = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    total += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(assignment[i]));
  }
  return total;
}

double matched_max_deviation(std::span<const Complex> a, std::span<const Complex> b) {
  const Matrix cost = distance_matrix(a, b);
  const auto assignment = hungarian_assignment(cost);
  double worst = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    worst = std::max(worst, cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(assignment[i])));
  }
  return worst;
}

double spectral_radius(std::span<const Complex> values) {
  double r = 0.0;
  for (const Complex& v : values) r = std::max(r, std::abs(v));
  return r;
}

SpectralVerdict classify_by_spectra(const SpectralSignature& sig, const SpectralSignature& nominal,
                                    double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCategory::invalid_input, "spectral tolerance must be positive");
  SpectralVerdict v;
  v.d1 = eigenset_distance(sig.lambda1, nominal.lambda1);
  v.d2 = eigenset_distance(sig.lambda2, nominal.lambda2);
  v.threshold1 = tol * std::max(1.0, spectral_radius(nominal.lambda1));
  v.threshold2 = tol * std::max(1.0, spectral_radius(nominal.lambda2));
  const bool moved1 = v.d1 > v.threshold1;
  const bool moved2 = v.d2 > v.threshold2;
  if (moved1 && moved2) {
    v.cls = ScenarioClass::Physical;
  } else if (moved1) {
    v.cls = ScenarioClass::Control;
  } else if (moved2) {
    v.cls = ScenarioClass::Measurement;
  } else {
    v.cls = ScenarioClass::Normal;
  }
  return v;
}

std::size_t numerical_rank(const Matrix& M, std::size_t n) {
  if (M.size() == 0) return 0;
  const Eigen::JacobiSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double threshold = s(0) * static_cast<double>(n) * 1e-10;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold) ++rank;
  }
  return rank;
}

RankResult controllability_rank(const Matrix& A, const Matrix& B) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n) {
    throw Error(ErrorCategory::dimension_mismatch, "controllability: A must be n x n and B n x q");
  }
  const Eigen::Index q = B.cols();
  RankResult out;
  out.matrix.resize(n, n * q);
  Matrix block = B;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.matrix.middleCols(i * q, q) = block;
    block = (A * block).eval();
  }
  out.rank = numerical_rank(out.matrix, static_cast<std::size_t>(n));
  return out;
}

RankResult observability_rank(const Matrix& A, const Matrix& C) {
  if (C.cols() != A.rows()) {
    throw Error(ErrorCategory::dimension_mismatch, "observability: C must have n columns");
  }
  RankResult dual = controllability_rank(A.transpose(), C.transpose());
  dual.matrix.transposeInPlace();
  return dual;
}

std::vector<SensorAudit> sensor_loss_audit(const Matrix& A, const Matrix& C) {
  std::vector<SensorAudit> out;
  for (Eigen::Index s = 0; s < C.rows(); ++s) {
    Matrix reduced = C;
    reduced.row(s).setZero();
    out.push_back({static_cast<std::size_t>(s), observability_rank(A, reduced).rank});
  }
  return out;
}

}  // namespace gridshs::spectral
