#pragma once

#include <cstdint>
#include <vector>

#include "gridshs/control_design.hpp"
#include "gridshs/grid_model.hpp"
#include "gridshs/types.hpp"

namespace gridshs::sim {

struct SimConfig {
  double sample_period = 0.02;  ///< t_s, seconds
  double window = 1.0;          ///< tau0, seconds
  double interval = 1.0;        ///< tau, seconds (>= window)
  /// Half-width of the uniform initial perturbation on every state of the
  /// augmented vector [x; x - xhat].
  double kick = 0.05;
  std::uint64_t seed = 1;

  void validate() const;
  /// N0 = round(window / sample_period).
  std::size_t samples_per_window() const;
  std::size_t samples_per_interval() const;
};

/// Exact zero-order-hold pair.
struct Discretized {
  Matrix Ad;
  Matrix Bd;
};

/// Ad = exp(A t_s), Bd = int_0^{t_s} exp(A s) ds B via one exponential of
/// the augmented matrix [[A, B], [0, 0]] t_s.
Discretized discretize(const Matrix& A, const Matrix& B, double sample_period);

/// Closed-loop model with its ZOH pair precomputed.
struct DiscreteClosedLoop {
  control::ClosedLoopModel model;
  Discretized zoh;
  double sample_period = 0.0;
};

DiscreteClosedLoop prepare(const control::ClosedLoopModel& model, double sample_period);

struct OutputTrace {
  Matrix samples;  ///< N0 x (r + n), columns [y; xhat]
  int window = 0;
  int scenario_id = 0;
};

struct WindowResult {
  OutputTrace trace;
  Vector terminal_state;  ///< augmented state after the last emitted sample
};

/// Runs N0 samples: y_c(l) = C_cl z_l + [N_l; 0], z_{l+1} = Ad z_l + Bd [v_l; 0].
/// `v` is either empty (v = 0) or N0 x q. Noise comes from `seed` only.
/// `steps` extends propagation past the window (for schedules); only the
/// first N0 samples are recorded.
WindowResult simulate_window(const DiscreteClosedLoop& model, const Vector& z0, const Matrix& v,
                             const SimConfig& cfg, std::uint64_t seed, std::size_t steps = 0);

WindowResult simulate_window(const control::ClosedLoopModel& model, const Vector& z0,
                             const Matrix& v, const SimConfig& cfg, std::uint64_t seed);

/// Same as simulate_window with sigma forced to zero.
OutputTrace nominal_reference(const DiscreteClosedLoop& nominal, const Vector& z0,
                              const Matrix& v, const SimConfig& cfg);

/// Seeded perturbation: every entry uniform in [-cfg.kick, cfg.kick].
Vector excitation_kick(std::size_t augmented_states, const SimConfig& cfg, std::uint64_t seed);

struct ScheduleInterval {
  int k = 0;
  int scenario_id = 0;
  double duration = 1.0;
};

struct Schedule {
  std::vector<ScheduleInterval> intervals;
};

struct ScheduledWindow {
  OutputTrace monitored;
  OutputTrace nominal;
  int scenario_id = 0;
  ScenarioClass truth = ScenarioClass::Normal;
};

/// Bank of discretized closed loops for every registry scenario.
std::vector<DiscreteClosedLoop> prepare_bank(const grid::ScenarioRegistry& registry,
                                             const control::GainSet& gains, double sigma,
                                             double sample_period);

/// One window per interval. Each window starts from the previous interval's
/// terminal state plus a seeded kick; the noise-free nominal reference is
/// recomputed from that same start.
std::vector<ScheduledWindow> simulate_schedule(const grid::ScenarioRegistry& registry,
                                               const control::GainSet& gains,
                                               const Schedule& schedule, const SimConfig& cfg,
                                               double sigma, std::uint64_t seed);

}  // namespace gridshs::sim
