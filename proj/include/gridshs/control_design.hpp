#pragma once

#include <cstdint>
#include <span>

#include "gridshs/grid_model.hpp"
#include "gridshs/types.hpp"

namespace gridshs::control {

struct GainSet {
  Matrix K;  ///< q x n state feedback, u = K xhat + v
  Matrix G;  ///< n x r observer injection
  ComplexList feedback_poles;
  ComplexList observer_poles;
};

/// Augmented closed loop over z = [x; x - xhat]:
///   zdot = A_cl z + B_cl [v; N],   y_c = C_cl z + [N; 0].
struct ClosedLoopModel {
  int scenario_id = 0;
  ScenarioClass cls = ScenarioClass::Normal;
  Matrix A_cl;
  Matrix B_cl;
  Matrix C_cl;
  double sigma = 1e-3;
  std::size_t states = 0;   ///< n
  std::size_t inputs = 0;   ///< q
  std::size_t outputs = 0;  ///< r

  std::size_t output_width() const { return outputs + states; }
};

struct PlacementOptions {
  std::uint64_t seed = 0x5eed;
  /// Seeded eigenvector starts tried for multi-input pairs; the draw with
  /// the smallest spectrum mismatch is kept.
  int draws = 8;
  /// Conditioning sweeps per draw.
  int sweeps = 40;
};

/// K such that eig(A + B K) = poles. Single-input pairs use Ackermann's
/// formula on a time-scaled copy; multi-input pairs use robust
/// eigenstructure assignment. Throws Error(not_controllable) on rank
/// deficiency of the controllability matrix.
Matrix place_poles_feedback(const Matrix& A, const Matrix& B, std::span<const Complex> poles,
                            const PlacementOptions& options = {});

/// G such that eig(A + G C) = poles, by duality on (A^T, C^T).
Matrix place_poles_observer(const Matrix& A, const Matrix& C, std::span<const Complex> poles,
                            const PlacementOptions& options = {});

/// Open-loop eigenvalues with real parts pushed to <= -0.2, keeping the
/// imaginary parts. Collisions are spread by -0.05 steps.
ComplexList default_feedback_poles(const Matrix& A);

/// {-6, -7, ..., -(n + 5)}.
ComplexList default_observer_poles(std::size_t n);

/// Designs K and G once, on the nominal model.
GainSet design_gains(const grid::ScenarioModel& nominal, const ComplexList& feedback_poles,
                     const ComplexList& observer_poles, const PlacementOptions& options = {});
GainSet design_gains(const grid::ScenarioModel& nominal, const PlacementOptions& options = {});

ClosedLoopModel build_closed_loop(const grid::ScenarioModel& scenario, const GainSet& gains,
                                  double sigma);

/// Largest |achieved - requested| after optimal matching of eig(M) to poles.
double placement_error(const Matrix& closed_loop, std::span<const Complex> poles);

}  // namespace gridshs::control
