#include "gridshs/control_design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "gridshs/error.hpp"
#include "gridshs/spectral_analysis.hpp"

namespace gridshs::control {
namespace {

// Monic characteristic polynomial, coefficients in ascending order
// (coeffs[n] == 1). Rejects pole sets that are not conjugate-closed.
std::vector<double> characteristic_polynomial(std::span<const Complex> poles) {
  std::vector<Complex> c{Complex(1.0, 0.0)};
  for (const Complex& p : poles) {
    std::vector<Complex> next(c.size() + 1, Complex(0.0, 0.0));
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= p * c[i];
    }
    c = std::move(next);
  }
  std::vector<double> out(c.size());
  double scale = 1.0;
  for (const auto& v : c) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (std::abs(c[i].imag()) > 1e-9 * scale) {
      throw Error(ErrorCategory::invalid_input, "requested poles are not closed under conjugation");
    }
    out[i] = c[i].real();
  }
  return out;
}

// Single-input Ackermann: k with eig(A + b k) = poles. Expects A and poles
// already scaled to order one.
Eigen::RowVectorXd ackermann(const Matrix& A, const Vector& b, std::span<const Complex> poles) {
  const Eigen::Index n = A.rows();
  Matrix ctrb(n, n);
  ctrb.col(0) = b;
  for (Eigen::Index i = 1; i < n; ++i) ctrb.col(i) = A * ctrb.col(i - 1);

  const auto coeffs = characteristic_polynomial(poles);
  // Horner: phi(A) = (((A + c_{n-1}) A + c_{n-2}) A + ...) + c_0.
  Matrix phi = Matrix::Identity(n, n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    phi = (A * phi).eval();
    phi.diagonal().array() += coeffs[static_cast<std::size_t>(i)];
  }
  Vector en = Vector::Zero(n);
  en(n - 1) = 1.0;
  const Vector w = ctrb.transpose().fullPivLu().solve(en);
  return -(w.transpose() * phi);
}

double pair_scale(const Matrix& A, std::span<const Complex> poles) {
  double scale = 1.0;
  for (const Complex& p : poles) scale = std::max(scale, std::abs(p));
  for (const Complex& l : spectral::eigenvalues(A)) scale = std::max(scale, std::abs(l));
  return scale;
}

}  // namespace

double placement_error(const Matrix& closed_loop, std::span<const Complex> poles) {
  return spectral::matched_max_deviation(spectral::eigenvalues(closed_loop), poles);
}

namespace {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct PoleSlot {
  Complex pole;
  std::size_t partner;  // index of the conjugate slot, or itself when real
};

// Pairs every complex pole with its conjugate so eigenvectors can be kept
// conjugate and the resulting gain real.
std::vector<PoleSlot> pair_poles(std::span<const Complex> poles, double scale) {
  const double real_tol = 1e-12 * scale;
  std::vector<PoleSlot> slots;
  std::vector<bool> taken(poles.size(), false);
  for (std::size_t i = 0; i < poles.size(); ++i) {
    if (taken[i]) continue;
    taken[i] = true;
    if (std::abs(poles[i].imag()) <= real_tol) {
      slots.push_back({Complex(poles[i].real(), 0.0), slots.size()});
      continue;
    }
    std::size_t mate = poles.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < poles.size(); ++j) {
      const double d = std::abs(poles[j] - std::conj(poles[i]));
      if (!taken[j] && d < best) {
        best = d;
        mate = j;
      }
    }
    if (mate == poles.size() || best > 1e-9 * scale) {
      throw Error(ErrorCategory::invalid_input, "requested poles are not closed under conjugation");
    }
    taken[mate] = true;
    const Complex upper = poles[i].imag() > 0.0 ? poles[i] : std::conj(poles[i]);
    const std::size_t at = slots.size();
    slots.push_back({upper, at + 1});
    slots.push_back({std::conj(upper), at});
  }
  return slots;
}

// Robust eigenstructure assignment for q > 1 inputs. Each closed-loop
// eigenvector x_j must lie in S_j = null(U1^T (A - p_j I)), where B = U [Z; 0].
// Starting from a seeded draw inside each S_j, sweeps rotate x_j toward the
// direction orthogonal to the other eigenvectors, which drives X toward
// good conditioning. Then K = Z^{-1} U0^T (X P X^{-1} - A).
Matrix assign_eigenstructure(const Matrix& A, const Matrix& B, std::span<const Complex> poles,
                             std::mt19937_64& rng, int sweeps) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  const Eigen::HouseholderQR<Matrix> qr(B);
  const Matrix U = qr.householderQ();
  const Matrix Z = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  const Matrix U0 = U.leftCols(m);
  const Matrix U1 = U.rightCols(n - m);

  double scale = 1.0;
  for (const Complex& p : poles) scale = std::max(scale, std::abs(p));
  const auto slots = pair_poles(poles, scale);

  std::vector<CMatrix> basis(slots.size());
  for (std::size_t j = 0; j < slots.size(); ++j) {
    if (slots[j].partner < j) {
      basis[j] = basis[slots[j].partner].conjugate();
      continue;
    }
    CMatrix M = (U1.transpose() * A).cast<Complex>();
    if (n > m) M -= slots[j].pole * U1.transpose().cast<Complex>();
    if (n == m) {
      basis[j] = CMatrix::Identity(n, n);
    } else {
      const Eigen::JacobiSVD<CMatrix> svd(M, Eigen::ComputeFullV);
      basis[j] = svd.matrixV().rightCols(m);
    }
  }

  std::normal_distribution<double> normal;
  CMatrix X(n, n);
  for (std::size_t j = 0; j < slots.size(); ++j) {
    if (slots[j].partner < j) {
      X.col(static_cast<Eigen::Index>(j)) = X.col(static_cast<Eigen::Index>(slots[j].partner)).conjugate();
      continue;
    }
    CVector c(basis[j].cols());
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = Complex(normal(rng), normal(rng));
    if (slots[j].partner == j) c = c.real().cast<Complex>();
    X.col(static_cast<Eigen::Index>(j)) = (basis[j] * c).normalized();
  }

  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t j = 0; j < slots.size(); ++j) {
      if (slots[j].partner < j) continue;
      const auto jj = static_cast<Eigen::Index>(j);
      CMatrix others(n, n - 1);
      others << X.leftCols(jj), X.rightCols(n - jj - 1);
      const Eigen::HouseholderQR<CMatrix> oqr(others);
      const CVector y = CMatrix(oqr.householderQ()).col(n - 1);
      CVector x = basis[j] * (basis[j].adjoint() * y);
      if (slots[j].partner == j) x = x.real().cast<Complex>();
      const double norm = x.norm();
      if (norm < 1e-12) continue;
      X.col(jj) = x / norm;
      if (slots[j].partner != j) {
        X.col(static_cast<Eigen::Index>(slots[j].partner)) = X.col(jj).conjugate();
      }
    }
  }

  CVector lambda(n);
  for (std::size_t j = 0; j < slots.size(); ++j) lambda(static_cast<Eigen::Index>(j)) = slots[j].pole;
  // M = X diag(lambda) X^{-1}, via M^T = X^{-T} (X diag(lambda))^T.
  const CMatrix XL = X * lambda.asDiagonal();
  const CMatrix target = X.transpose().partialPivLu().solve(XL.transpose()).transpose();
  const Matrix closed = target.real();
  return Z.triangularView<Eigen::Upper>().solve(U0.transpose() * (closed - A));
}

}  // namespace

Matrix place_poles_feedback(const Matrix& A, const Matrix& B, std::span<const Complex> poles,
                            const PlacementOptions& options) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || B.cols() == 0) {
    throw Error(ErrorCategory::dimension_mismatch, "pole placement: A must be n x n and B n x q");
  }
  if (static_cast<Eigen::Index>(poles.size()) != n) {
    throw Error(ErrorCategory::invalid_input, "pole placement: need exactly n poles");
  }
  characteristic_polynomial(poles);

  const auto ctrb = spectral::controllability_rank(A, B);
  if (ctrb.rank < static_cast<std::size_t>(n)) {
    throw Error(ErrorCategory::not_controllable,
                "pair is not controllable: controllability matrix rank " +
                    std::to_string(ctrb.rank) + " < " + std::to_string(n));
  }

  const double scale = pair_scale(A, poles);
  if (B.cols() == 1) {
    ComplexList scaled(poles.begin(), poles.end());
    for (auto& p : scaled) p /= scale;
    const double bnorm = B.norm();
    const Matrix K = ackermann(A / scale, B.col(0) / bnorm, scaled) * (scale / bnorm);
    if (!K.allFinite()) throw Error(ErrorCategory::numerical, "Ackermann gain is not finite");
    return K;
  }
  if (spectral::numerical_rank(B, static_cast<std::size_t>(n)) < static_cast<std::size_t>(B.cols())) {
    throw Error(ErrorCategory::invalid_input, "input matrix must have full column rank");
  }

  std::mt19937_64 rng(options.seed);
  Matrix best;
  double best_error = std::numeric_limits<double>::infinity();
  for (int d = 0; d < std::max(1, options.draws); ++d) {
    const Matrix K = assign_eigenstructure(A, B, poles, rng, options.sweeps);
    if (!K.allFinite()) continue;
    const double err = placement_error(A + B * K, poles);
    if (err < best_error) {
      best_error = err;
      best = K;
    }
    if (best_error <= 1e-12 * scale) break;
  }
  if (!std::isfinite(best_error)) {
    throw Error(ErrorCategory::numerical, "eigenstructure assignment produced no finite gain");
  }
  return best;
}

Matrix place_poles_observer(const Matrix& A, const Matrix& C, std::span<const Complex> poles,
                            const PlacementOptions& options) {
  if (C.cols() != A.rows()) {
    throw Error(ErrorCategory::dimension_mismatch, "observer placement: C must have n columns");
  }
  const auto obsv = spectral::observability_rank(A, C);
  if (obsv.rank < static_cast<std::size_t>(A.rows())) {
    throw Error(ErrorCategory::not_observable,
                "pair is not observable: observability matrix rank " + std::to_string(obsv.rank) +
                    " < " + std::to_string(A.rows()));
  }
  return place_poles_feedback(A.transpose(), C.transpose(), poles, options).transpose();
}

ComplexList default_feedback_poles(const Matrix& A) {
  constexpr double kMaxReal = -0.2;
  constexpr double kSpread = 0.05;
  ComplexList out;
  auto collides = [&out](Complex p) {
    return std::any_of(out.begin(), out.end(), [p](Complex q) { return std::abs(p - q) < 1e-3; });
  };
  for (const Complex& l : spectral::eigenvalues(A)) {
    if (l.imag() < 0.0) continue;
    Complex p(std::min(l.real(), kMaxReal), l.imag());
    while (collides(p)) p -= kSpread;
    out.push_back(p);
    if (l.imag() > 0.0) out.push_back(std::conj(p));
  }
  return out;
}

ComplexList default_observer_poles(std::size_t n) {
  ComplexList out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(-6.0 - static_cast<double>(i), 0.0);
  return out;
}

GainSet design_gains(const grid::ScenarioModel& nominal, const ComplexList& feedback_poles,
                     const ComplexList& observer_poles, const PlacementOptions& options) {
  GainSet gains;
  gains.feedback_poles = feedback_poles;
  gains.observer_poles = observer_poles;
  gains.K = place_poles_feedback(nominal.A, nominal.B, feedback_poles, options);
  PlacementOptions observer_options = options;
  observer_options.seed = options.seed ^ 0x0b5e7e5ULL;
  gains.G = place_poles_observer(nominal.A, nominal.C, observer_poles, observer_options);
  return gains;
}

GainSet design_gains(const grid::ScenarioModel& nominal, const PlacementOptions& options) {
  return design_gains(nominal, default_feedback_poles(nominal.A),
                      default_observer_poles(nominal.state_count()), options);
}

ClosedLoopModel build_closed_loop(const grid::ScenarioModel& scenario, const GainSet& gains,
                                  double sigma) {
  const Eigen::Index n = scenario.A.rows();
  const Eigen::Index q = scenario.B.cols();
  const Eigen::Index r = scenario.C.rows();
  if (gains.K.rows() != q || gains.K.cols() != n || gains.G.rows() != n || gains.G.cols() != r ||
      scenario.A.cols() != n || scenario.B.rows() != n || scenario.C.cols() != n) {
    throw Error(ErrorCategory::dimension_mismatch,
                "closed loop: gains do not match scenario " + std::to_string(scenario.id));
  }
  if (!(sigma >= 0.0)) throw Error(ErrorCategory::invalid_input, "noise sigma must be >= 0");

  ClosedLoopModel cl;
  cl.scenario_id = scenario.id;
  cl.cls = scenario.cls;
  cl.sigma = sigma;
  cl.states = static_cast<std::size_t>(n);
  cl.inputs = static_cast<std::size_t>(q);
  cl.outputs = static_cast<std::size_t>(r);

  const Matrix BK = scenario.B * gains.K;
  cl.A_cl = Matrix::Zero(2 * n, 2 * n);
  cl.A_cl.topLeftCorner(n, n) = scenario.A + BK;
  cl.A_cl.topRightCorner(n, n) = -BK;
  cl.A_cl.bottomRightCorner(n, n) = scenario.A + gains.G * scenario.C;

  cl.B_cl = Matrix::Zero(2 * n, q + r);
  cl.B_cl.topLeftCorner(n, q) = scenario.B;
  cl.B_cl.bottomRightCorner(n, r) = gains.G;

  cl.C_cl = Matrix::Zero(r + n, 2 * n);
  cl.C_cl.topLeftCorner(r, n) = scenario.C;
  cl.C_cl.bottomLeftCorner(n, n) = Matrix::Identity(n, n);
  cl.C_cl.bottomRightCorner(n, n) = -Matrix::Identity(n, n);
  return cl;
}

}  // namespace gridshs::control
