#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "gridshs/types.hpp"

namespace gridshs::grid {

struct Line {
  int from_bus = 0;
  int to_bus = 0;
  double susceptance_pu = 0.0;
};

struct Generator {
  int bus = 0;
  double inertia_s2 = 0.0;
  double damping_pu = 0.0;
  double angle0_rad = 0.0;
};

enum class SensedState { Angle, Speed };

struct Sensor {
  std::size_t generator = 0;
  SensedState state = SensedState::Angle;
};

/// Grid description. State ordering of every derived model is
/// [delta_1, omega_1, delta_2, omega_2, ...] in generator order.
struct GridSpec {
  std::vector<int> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<Sensor> sensors;

  /// Throws Error(invalid_input) when an invariant is broken.
  void validate() const;

  std::size_t state_count() const { return 2 * generators.size(); }
  std::size_t input_count() const { return generators.size(); }
  std::size_t output_count() const { return sensors.size(); }
};

struct ScenarioModel {
  int id = 0;
  ScenarioClass cls = ScenarioClass::Normal;
  Matrix A;
  Matrix B;
  Matrix C;
  std::string description;
  bool islanded = false;

  std::size_t state_count() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t input_count() const { return static_cast<std::size_t>(B.cols()); }
  std::size_t output_count() const { return static_cast<std::size_t>(C.rows()); }
};

struct ScenarioRegistry {
  std::vector<ScenarioModel> scenarios;

  const ScenarioModel& nominal() const { return scenarios.front(); }
  const ScenarioModel& at(int id) const;
  std::size_t size() const { return scenarios.size(); }
  std::size_t count(ScenarioClass c) const;
  /// Ids of a class, skipping islanded scenarios unless asked.
  std::vector<int> ids_of(ScenarioClass c, bool include_islanded = false) const;
  /// Throws when ids are not 0..size-1, id 0 is not Normal, or dims differ.
  void validate() const;
};

/// Kron-reduced coupling between generator internal nodes.
struct ReducedNetwork {
  /// Symmetric generator-by-generator Laplacian (positive diagonal).
  Matrix laplacian;
  bool islanded = false;
};

/// Eliminates non-generator buses from the susceptance Laplacian built from
/// the lines whose `active` flag is set. Buses in islands without any
/// generator carry no current and are dropped before elimination.
ReducedNetwork reduce_network(const GridSpec& grid, const std::vector<bool>& active);

/// Classical swing-equation linearization around the operating angles.
ScenarioModel build_nominal_model(const GridSpec& grid);

/// Physical contingency: the listed line indices are removed from the
/// network and A is rebuilt. B and C stay nominal.
ScenarioModel apply_line_outage(const GridSpec& grid, const std::set<std::size_t>& out_lines);

/// Control contingency: column `input_index` of B scaled by `gain`.
ScenarioModel apply_control_fault(const ScenarioModel& nominal, std::size_t input_index,
                                  double gain);

/// Measurement contingency: row `output_index` of C scaled by `gain`.
ScenarioModel apply_measurement_fault(const ScenarioModel& nominal, std::size_t output_index,
                                      double gain);

struct GainRange {
  double min = 0.5;
  double max = 1.5;
  /// Gains with |g - 1| below this are redrawn; they barely perturb the model.
  double min_deviation = 0.1;
  /// When set, the first scenario on each channel is a total loss (gain 0).
  bool include_loss = true;
};

struct EnumerationPlan {
  std::size_t physical = 29;
  /// How many of the physical scenarios are N-2 pairs; the rest are N-1.
  std::size_t physical_n2 = 9;
  std::size_t control = 32;
  std::size_t measurement = 32;
  GainRange control_gains;
  GainRange measurement_gains{0.5, 1.5, 0.1, true};
  /// Outages whose relative change of the reduced coupling is below this
  /// are skipped: they leave the dynamics (and so every feature) unchanged.
  double min_outage_effect = 1e-3;
  std::uint64_t seed = 1;
};

/// Builds the registry: id 0 Normal, then physical, control, measurement.
ScenarioRegistry enumerate_scenarios(const GridSpec& grid, const EnumerationPlan& plan);

/// Relative Frobenius change of the reduced coupling after removing lines.
double outage_effect(const GridSpec& grid, const std::set<std::size_t>& out_lines);

/// The 30-bus desk grid: standard 30-bus topology (line reactances of the
/// usual test case, susceptance = 1/x), five generators at buses 1, 2, 5,
/// 8 and 11, a rotor-angle sensor on every generator. Inertia,
/// damping and operating angles are drawn from `seed`.
GridSpec make_desk_grid(std::uint64_t seed = 7);

}  // namespace gridshs::grid
