#pragma once

#include <cstddef>
#include <functional>

#include "gridshs/control_design.hpp"
#include "gridshs/grid_model.hpp"
#include "gridshs/types.hpp"

namespace gridshs::exogenous {

/// Static fault on one signal channel: faulted = gain * clean + offset.
struct SignalFault {
  std::size_t channel = 0;
  double gain = 1.0;
  double offset = 0.0;

  static SignalFault loss(std::size_t channel) { return {channel, 0.0, 0.0}; }
  static SignalFault scale(std::size_t channel, double gain) { return {channel, gain, 0.0}; }

  double apply(double clean) const { return gain * clean + offset; }
  /// Only multiplicative faults map to a constant matrix.
  bool representable() const { return offset == 0.0; }
};

enum class FaultSite { Input, Output };

/// B2 with column `channel` scaled by the fault gain. Throws
/// Error(unsupported_fault) for offset faults.
Matrix equivalent_input_fault(const Matrix& B1, const SignalFault& fault);

/// C2 with row `channel` scaled by the fault gain.
Matrix equivalent_output_fault(const Matrix& C1, const SignalFault& fault);

/// The registry scenario that stands in for the fault: Control for input
/// faults, Measurement for output faults.
grid::ScenarioModel equivalent_scenario(const grid::ScenarioModel& nominal, FaultSite site,
                                        const SignalFault& fault);

/// Where the faulted measurement enters the observer of the actual system.
enum class OutputFaultTap {
  /// The faulted channel carries the innovation: both y_i and the estimate
  /// of y_i pass through it.
  Innovation,
  /// Only the plant measurement y_i is faulted; the observer keeps the
  /// healthy C row for its own estimate.
  MeasurementOnly,
};

struct EquivalenceOptions {
  double horizon = 1.0;
  double step = 1e-3;
  double tolerance = 1e-9;
  OutputFaultTap tap = OutputFaultTap::Innovation;
};

struct EquivalenceReport {
  double max_dev_x = 0.0;
  double max_dev_xhat = 0.0;
  double max_dev_y = 0.0;
  double tolerance = 0.0;
  std::size_t steps = 0;

  double max_deviation() const;
  bool passed() const { return max_deviation() <= tolerance; }
};

/// External input v(t); the controller applies u = K xhat + v.
using InputSignal = std::function<Vector(double)>;

/// Co-simulates the actual system (healthy matrices, faulted signal) and
/// the switched model (mapped matrices, clean signals) with the same RK4
/// steps from the same (x0, xhat0), and reports the largest deviations of
/// x, xhat and y over the horizon. A failed comparison is a result, not an
/// error; offset faults are simulated as-is on the actual side.
EquivalenceReport verify_equivalence(const grid::ScenarioModel& nominal,
                                     const control::GainSet& gains, FaultSite site,
                                     const SignalFault& fault, const Vector& x0,
                                     const Vector& xhat0, const InputSignal& v = {},
                                     const EquivalenceOptions& options = {});

}  // namespace gridshs::exogenous
