#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridshs/control_design.hpp"
#include "gridshs/evaluate.hpp"
#include "gridshs/grid_model.hpp"
#include "gridshs/sim_engine.hpp"

namespace gridshs::pipeline {

using Json = nlohmann::ordered_json;

struct DatasetPlan {
  std::size_t rows_per_class = 240;
  std::vector<double> sigmas{1e-4, 1e-3, 1e-2};
  bool include_raw = false;
};

struct ControlPlan {
  /// Empty means the defaults derived from the nominal model.
  ComplexList feedback_poles;
  ComplexList observer_poles;
  control::PlacementOptions placement;
  /// Noise level for detection runs.
  double sigma = 1e-3;
};

struct LearningPlan {
  std::size_t folds = 5;
  std::vector<learning::KnnParams> knn_grid = learning::default_knn_grid();
  std::vector<learning::SvmParams> svm_grid = learning::default_svm_grid();
  bool calibrate = true;
};

/// Everything a run needs besides the artifacts it reads.
struct RunConfig {
  grid::GridSpec grid;
  grid::EnumerationPlan enumeration;
  ControlPlan control;
  sim::SimConfig simulation;
  DatasetPlan dataset;
  LearningPlan learning;
  std::uint64_t seed = 1;
};

/// The desk defaults: 30-bus grid, 94-scenario plan, 240 rows per class.
RunConfig desk_config();

Json to_json(const grid::GridSpec& grid);
grid::GridSpec grid_from_json(const Json& j);

Json to_json(const RunConfig& config);
/// Missing sections keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const Json& j);

/// Reads a config file, or the built-in desk config for the name "desk".
RunConfig load_config(const std::string& path_or_name);

Json complex_list_to_json(const ComplexList& values);
ComplexList complex_list_from_json(const Json& j);
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

/// Parses a whole file as JSON, mapping failures to Error(io).
Json read_json_file(const std::string& path);
/// Writes `j` with two-space indentation and a trailing newline.
void write_json_file(const std::string& path, const Json& j);

}  // namespace gridshs::pipeline
