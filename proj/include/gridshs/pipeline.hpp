#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gridshs/control_design.hpp"
#include "gridshs/dataset.hpp"
#include "gridshs/evaluate.hpp"
#include "gridshs/exogenous_map.hpp"
#include "gridshs/grid_model.hpp"
#include "gridshs/knn.hpp"
#include "gridshs/run_config.hpp"
#include "gridshs/sim_engine.hpp"
#include "gridshs/spectral_analysis.hpp"
#include "gridshs/svm.hpp"

namespace gridshs::pipeline {

/// Scenario registry plus the gains designed on its nominal model.
struct ModelBank {
  RunConfig config;
  std::string grid_hash;
  grid::ScenarioRegistry registry;
  control::GainSet gains;
};

std::string grid_hash(const grid::GridSpec& grid);

/// Enumerates scenarios and designs gains; errors name the failing step.
ModelBank build_bank(const RunConfig& config);

Json to_json(const ModelBank& bank);
ModelBank bank_from_json(const Json& j);
void write_bank(const std::string& path, const ModelBank& bank);
ModelBank read_bank(const std::string& path);

/// Rows are dealt per class: row j of a class uses scenario
/// ids[(j / S) mod m] at noise level sigmas[j mod S]. Islanded scenarios are
/// skipped. Rows are simulated in parallel with counter-derived seeds.
learning::Dataset generate_dataset(const ModelBank& bank, const DatasetPlan& plan, std::uint64_t seed);

enum class ClassifierKind { Knn, Svm };

std::string to_string(ClassifierKind kind);
ClassifierKind parse_classifier_kind(const std::string& name);

struct Classifier {
  ClassifierKind kind = ClassifierKind::Knn;
  learning::KnnModel knn;
  learning::SvmModel svm;
  std::string dataset_hash;
  std::uint64_t seed = 0;
  std::vector<double> sigmas;
  double cv_mean = 0.0;

  std::size_t dimension() const;
  int predict(const Vector& x) const;
};

Json to_json(const Classifier& c);
Classifier classifier_from_json(const Json& j);
void write_classifier(const std::string& path, const Classifier& c);
Classifier read_classifier(const std::string& path);

struct TrainResult {
  Classifier classifier;
  std::string cv_table;  ///< CSV, one row per grid cell
};

/// Grid search on the dataset, refit of the best cell on all rows, and
/// (for the SVM, when enabled) out-of-fold calibration.
TrainResult train_classifier(const learning::Dataset& data, ClassifierKind kind, const LearningPlan& plan,
                             std::uint64_t seed);

/// Uniform class, then uniform non-islanded scenario within it.
sim::Schedule random_schedule(const grid::ScenarioRegistry& registry, std::size_t intervals, double duration,
                              std::uint64_t seed);
Json to_json(const sim::Schedule& schedule);
sim::Schedule schedule_from_json(const Json& j);
/// "random:N" or a schedule file.
sim::Schedule load_schedule(const std::string& spec, const ModelBank& bank, std::uint64_t seed);

struct DetectionRow {
  int k = 0;
  int scenario_id = 0;
  ScenarioClass truth = ScenarioClass::Normal;
  ScenarioClass predicted = ScenarioClass::Normal;
  double max_abs_E = 0.0;
  double classify_ms = 0.0;  ///< feature extraction + prediction wall time
};

struct DetectionReport {
  std::vector<DetectionRow> rows;
  double window_s = 0.0;
  double sigma = 0.0;

  double accuracy() const;
  double mean_classify_ms() const;
};

/// Online stage only: simulate, extract features, predict. No training.
DetectionReport run_detection(const ModelBank& bank, const Classifier& classifier, const sim::Schedule& schedule,
                              double sigma, std::uint64_t seed,
                              std::vector<sim::ScheduledWindow>* windows = nullptr);

/// Deterministic part of the report (no timings).
void write_detection_csv(std::ostream& os, const DetectionReport& report);
void write_latency_csv(std::ostream& os, const DetectionReport& report);

/// One row per sample: window, sample, y_1..y_r, xhat_1..xhat_n.
void write_trace_csv(std::ostream& os, const std::vector<sim::OutputTrace>& traces, std::size_t outputs);

struct SpectraRow {
  int id = 0;
  ScenarioClass declared = ScenarioClass::Normal;
  std::string description;
  bool islanded = false;
  spectral::SpectralSignature signature;
  spectral::SpectralVerdict verdict;
  bool agrees() const { return verdict.cls == declared; }
};

std::vector<SpectraRow> spectra_report(const ModelBank& bank, double tol = 1e-6);
/// Scenarios whose spectral class disagrees with the declared one,
/// islanded scenarios excluded.
std::size_t spectral_disagreements(const std::vector<SpectraRow>& rows);
void write_spectra_csv(std::ostream& os, const std::vector<SpectraRow>& rows);

struct EquivalenceCase {
  exogenous::FaultSite site = exogenous::FaultSite::Input;
  exogenous::SignalFault fault;
  std::size_t trials = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  bool passed() const { return worst <= tolerance; }
};

/// Loss and x1.20 on every input, loss and x1.10 on every output.
std::vector<std::pair<exogenous::FaultSite, exogenous::SignalFault>> default_fault_set(const ModelBank& bank);

/// Each fault over `trials` seeded initial conditions (x and xhat uniform
/// in +-kick).
std::vector<EquivalenceCase> run_equivalence(
    const ModelBank& bank, const std::vector<std::pair<exogenous::FaultSite, exogenous::SignalFault>>& faults,
    std::size_t trials, std::uint64_t seed, const exogenous::EquivalenceOptions& options = {});
void write_equivalence_csv(std::ostream& os, const std::vector<EquivalenceCase>& cases);

/// Controllability/observability ranks per scenario and the sensor-loss audit.
void write_rank_report(std::ostream& os, const ModelBank& bank);

}  // namespace gridshs::pipeline
