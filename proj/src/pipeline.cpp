#include "gridshs/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "gridshs/error.hpp"
#include "gridshs/features.hpp"
#include "gridshs/parallel.hpp"
#include "gridshs/seed.hpp"

namespace gridshs::pipeline {
namespace {

constexpr int kBankVersion = 1;
constexpr int kClassifierVersion = 1;

Json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

ScenarioClass class_from_name(const std::string& name) {
  const auto cls = parse_scenario_class(name);
  if (!cls) throw Error(ErrorCategory::io, "unknown scenario class '" + name + "'");
  return *cls;
}

void check_format(const Json& j, const char* format, int version) {
  if (!j.is_object() || !j.contains("format") || j.at("format") != format) {
    throw Error(ErrorCategory::io, std::string("expected a ") + format + " document");
  }
  if (!j.contains("version") || j.at("version") != version) {
    throw Error(ErrorCategory::io, std::string("unsupported ") + format + " version");
  }
}

std::string complex_text(const ComplexList& values) {
  std::ostringstream os;
  os << std::setprecision(10);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ';';
    os << values[i].real();
    if (values[i].imag() != 0.0) os << (values[i].imag() < 0 ? "-" : "+") << std::abs(values[i].imag()) << 'j';
  }
  return os.str();
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

}  // namespace

std::string grid_hash(const grid::GridSpec& grid) { return learning::fnv1a_hex(to_json(grid).dump()); }

ModelBank build_bank(const RunConfig& config) {
  ModelBank bank;
  bank.config = config;
  bank.grid_hash = grid_hash(config.grid);
  bank.registry = grid::enumerate_scenarios(config.grid, config.enumeration);
  const auto& nominal = bank.registry.nominal();
  const ComplexList feedback = config.control.feedback_poles.empty()
                                   ? control::default_feedback_poles(nominal.A)
                                   : config.control.feedback_poles;
  const ComplexList observer = config.control.observer_poles.empty()
                                   ? control::default_observer_poles(nominal.state_count())
                                   : config.control.observer_poles;
  try {
    bank.gains = control::design_gains(nominal, feedback, observer, config.control.placement);
  } catch (const Error& e) {
    throw Error(e.category(), std::string("gain design on the nominal model: ") + e.what());
  }
  return bank;
}

Json to_json(const ModelBank& bank) {
  Json j;
  j["format"] = "gridshs-bank";
  j["version"] = kBankVersion;
  j["grid_hash"] = bank.grid_hash;
  j["config"] = to_json(bank.config);
  j["gains"] = Json{{"K", matrix_to_json(bank.gains.K)},
                    {"G", matrix_to_json(bank.gains.G)},
                    {"feedback_poles", complex_list_to_json(bank.gains.feedback_poles)},
                    {"observer_poles", complex_list_to_json(bank.gains.observer_poles)}};
  Json scenarios = Json::array();
  for (const auto& s : bank.registry.scenarios) {
    scenarios.push_back(Json{{"id", s.id},
                             {"class", std::string(to_string(s.cls))},
                             {"description", s.description},
                             {"islanded", s.islanded},
                             {"A", matrix_to_json(s.A)},
                             {"B", matrix_to_json(s.B)},
                             {"C", matrix_to_json(s.C)}});
  }
  j["scenarios"] = std::move(scenarios);
  return j;
}

ModelBank bank_from_json(const Json& j) {
  check_format(j, "gridshs-bank", kBankVersion);
  ModelBank bank;
  try {
    bank.config = config_from_json(j.at("config"));
    bank.grid_hash = j.at("grid_hash").get<std::string>();
    const Json& g = j.at("gains");
    bank.gains.K = matrix_from_json(g.at("K"));
    bank.gains.G = matrix_from_json(g.at("G"));
    bank.gains.feedback_poles = complex_list_from_json(g.at("feedback_poles"));
    bank.gains.observer_poles = complex_list_from_json(g.at("observer_poles"));
    for (const auto& s : j.at("scenarios")) {
      grid::ScenarioModel m;
      m.id = s.at("id").get<int>();
      m.cls = class_from_name(s.at("class").get<std::string>());
      m.description = s.at("description").get<std::string>();
      m.islanded = s.at("islanded").get<bool>();
      m.A = matrix_from_json(s.at("A"));
      m.B = matrix_from_json(s.at("B"));
      m.C = matrix_from_json(s.at("C"));
      bank.registry.scenarios.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::io, std::string("malformed model bank: ") + e.what());
  }
  bank.registry.validate();
  if (bank.grid_hash != grid_hash(bank.config.grid)) {
    throw Error(ErrorCategory::io, "model bank grid hash does not match its grid section");
  }
  return bank;
}

void write_bank(const std::string& path, const ModelBank& bank) { write_json_file(path, to_json(bank)); }

ModelBank read_bank(const std::string& path) { return bank_from_json(read_json_file(path)); }

learning::Dataset generate_dataset(const ModelBank& bank, const DatasetPlan& plan, std::uint64_t seed) {
  if (plan.sigmas.empty()) throw Error(ErrorCategory::invalid_input, "dataset needs at least one noise level");
  for (const double s : plan.sigmas) {
    if (!(s >= 0.0)) throw Error(ErrorCategory::invalid_input, "noise levels must be >= 0");
  }
  const auto& registry = bank.registry;
  const auto& cfg = bank.config.simulation;
  cfg.validate();

  struct Job {
    int scenario_id;
    std::size_t sigma_index;
    ScenarioClass cls;
  };
  std::vector<Job> jobs;
  for (int c = 0; c < kClassCount; ++c) {
    const auto cls = static_cast<ScenarioClass>(c);
    const auto ids = registry.ids_of(cls);
    if (ids.empty()) {
      if (plan.rows_per_class == 0) continue;
      throw Error(ErrorCategory::invalid_input,
                  "no usable " + std::string(to_string(cls)) + " scenario for dataset generation");
    }
    const std::size_t S = plan.sigmas.size();
    for (std::size_t j = 0; j < plan.rows_per_class; ++j) {
      jobs.push_back({ids[(j / S) % ids.size()], j % S, cls});
    }
  }

  std::vector<std::vector<sim::DiscreteClosedLoop>> banks(plan.sigmas.size());
  std::vector<bool> used(registry.size(), false);
  for (const auto& job : jobs) used[static_cast<std::size_t>(job.scenario_id)] = true;
  used[0] = true;
  for (std::size_t s = 0; s < plan.sigmas.size(); ++s) {
    banks[s].resize(registry.size());
    for (std::size_t id = 0; id < registry.size(); ++id) {
      if (!used[id]) continue;
      banks[s][id] = sim::prepare(control::build_closed_loop(registry.scenarios[id], bank.gains, plan.sigmas[s]),
                                  cfg.sample_period);
    }
  }

  const std::size_t n2 = 2 * registry.nominal().state_count();
  learning::Dataset data;
  data.rows.resize(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    const auto& job = jobs[i];
    const auto& model = banks[job.sigma_index][static_cast<std::size_t>(job.scenario_id)];
    const Vector z0 = sim::excitation_kick(n2, cfg, child_seed(seed, SeedStream::dataset_row, i));
    sim::WindowResult run;
    try {
      run = sim::simulate_window(model, z0, Matrix(), cfg, child_seed(seed, SeedStream::dataset_noise, i));
    } catch (const Error& e) {
      throw Error(e.category(), "dataset row " + std::to_string(i) + ": " + e.what());
    }
    const auto reference = sim::nominal_reference(banks[job.sigma_index][0], z0, Matrix(), cfg);
    const auto errors = features::error_window(run.trace, reference);
    auto& row = data.rows[i];
    row.E = features::aggregate(errors).E;
    row.window = static_cast<int>(i);
    row.label = static_cast<int>(job.cls);
    row.scenario_id = job.scenario_id;
    row.sigma = plan.sigmas[job.sigma_index];
    if (plan.include_raw) row.raw = features::raw_sequence(errors);
  });
  data.provenance.seed = seed;
  data.provenance.sigmas = plan.sigmas;
  data.provenance.grid_hash = bank.grid_hash;
  data.provenance.rows_per_class = plan.rows_per_class;
  return data;
}

std::string to_string(ClassifierKind kind) { return kind == ClassifierKind::Knn ? "knn" : "svm"; }

ClassifierKind parse_classifier_kind(const std::string& name) {
  if (name == "knn") return ClassifierKind::Knn;
  if (name == "svm") return ClassifierKind::Svm;
  throw Error(ErrorCategory::invalid_input, "classifier must be 'knn' or 'svm', got '" + name + "'");
}

std::size_t Classifier::dimension() const {
  return kind == ClassifierKind::Knn ? static_cast<std::size_t>(knn.X.cols()) : svm.dimension();
}

int Classifier::predict(const Vector& x) const {
  return kind == ClassifierKind::Knn ? learning::knn_predict(knn, x).label : learning::svm_predict(svm, x);
}

Json to_json(const Classifier& c) {
  Json j;
  j["format"] = "gridshs-classifier";
  j["version"] = kClassifierVersion;
  j["kind"] = to_string(c.kind);
  j["feature_dimension"] = c.dimension();
  j["provenance"] = Json{{"dataset_hash", c.dataset_hash}, {"seed", c.seed}, {"sigmas_pu", c.sigmas}};
  j["cv_mean_accuracy"] = c.cv_mean;
  if (c.kind == ClassifierKind::Knn) {
    j["knn"] = Json{{"k", c.knn.k},
                    {"p", c.knn.p},
                    {"labels", c.knn.labels},
                    {"scenario_ids", c.knn.scenario_ids},
                    {"rows", matrix_to_json(c.knn.X)}};
  } else {
    const auto& m = c.svm;
    Json machines = Json::array();
    for (const auto& b : m.machines) {
      machines.push_back(Json{{"positive_class", b.positive_class},
                              {"bias", b.bias},
                              {"iterations", b.iterations},
                              {"alpha", vector_to_json(b.alpha)},
                              {"y", vector_to_json(b.y)},
                              {"support", matrix_to_json(b.support)}});
    }
    const auto& cal = m.calibration;
    j["svm"] = Json{{"C", m.C},
                    {"gamma", m.gamma},
                    {"scaler", Json{{"mean", vector_to_json(m.scaler.mean)}, {"scale", vector_to_json(m.scaler.scale)}}},
                    {"machines", std::move(machines)},
                    {"calibration", Json{{"enabled", cal.enabled},
                                         {"a", cal.a},
                                         {"b", cal.b},
                                         {"theta", cal.theta},
                                         {"uncalibrated_macro", cal.uncalibrated_macro},
                                         {"calibrated_macro", cal.calibrated_macro}}}};
  }
  return j;
}

Classifier classifier_from_json(const Json& j) {
  check_format(j, "gridshs-classifier", kClassifierVersion);
  Classifier c;
  try {
    c.kind = parse_classifier_kind(j.at("kind").get<std::string>());
    const Json& p = j.at("provenance");
    c.dataset_hash = p.at("dataset_hash").get<std::string>();
    c.seed = p.at("seed").get<std::uint64_t>();
    c.sigmas = p.at("sigmas_pu").get<std::vector<double>>();
    c.cv_mean = j.at("cv_mean_accuracy").get<double>();
    if (c.kind == ClassifierKind::Knn) {
      const Json& k = j.at("knn");
      c.knn.k = k.at("k").get<int>();
      c.knn.p = k.at("p").get<double>();
      c.knn.labels = k.at("labels").get<std::vector<int>>();
      c.knn.scenario_ids = k.at("scenario_ids").get<std::vector<int>>();
      c.knn.X = matrix_from_json(k.at("rows"));
      c.knn.validate();
    } else {
      const Json& s = j.at("svm");
      c.svm.C = s.at("C").get<double>();
      c.svm.gamma = s.at("gamma").get<double>();
      c.svm.scaler.mean = vector_from_json(s.at("scaler").at("mean"));
      c.svm.scaler.scale = vector_from_json(s.at("scaler").at("scale"));
      for (const auto& b : s.at("machines")) {
        learning::BinaryMachine m;
        m.positive_class = b.at("positive_class").get<int>();
        m.bias = b.at("bias").get<double>();
        m.iterations = b.at("iterations").get<std::size_t>();
        m.alpha = vector_from_json(b.at("alpha"));
        m.y = vector_from_json(b.at("y"));
        m.support = matrix_from_json(b.at("support"));
        c.svm.machines.push_back(std::move(m));
      }
      const Json& cal = s.at("calibration");
      c.svm.calibration.enabled = cal.at("enabled").get<bool>();
      c.svm.calibration.a = cal.at("a").get<std::vector<double>>();
      c.svm.calibration.b = cal.at("b").get<std::vector<double>>();
      c.svm.calibration.theta = cal.at("theta").get<std::vector<double>>();
      c.svm.calibration.uncalibrated_macro = cal.at("uncalibrated_macro").get<double>();
      c.svm.calibration.calibrated_macro = cal.at("calibrated_macro").get<double>();
      if (c.svm.machines.size() < 2) throw Error(ErrorCategory::io, "SVM needs at least two machines");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::io, std::string("malformed classifier: ") + e.what());
  }
  if (c.dimension() != j.at("feature_dimension").get<std::size_t>()) {
    throw Error(ErrorCategory::io, "classifier feature dimension is inconsistent");
  }
  return c;
}

void write_classifier(const std::string& path, const Classifier& c) { write_json_file(path, to_json(c)); }

Classifier read_classifier(const std::string& path) { return classifier_from_json(read_json_file(path)); }

TrainResult train_classifier(const learning::Dataset& data, ClassifierKind kind, const LearningPlan& plan,
                             std::uint64_t seed) {
  data.validate();
  std::ostringstream csv;
  learning::write_dataset_csv(csv, data);
  TrainResult result;
  auto& c = result.classifier;
  c.kind = kind;
  c.dataset_hash = learning::fnv1a_hex(csv.str());
  c.seed = seed;
  c.sigmas = data.provenance.sigmas;
  const std::uint64_t fold_seed = child_seed(seed, SeedStream::folds);
  std::ostringstream table;
  if (kind == ClassifierKind::Knn) {
    const auto gs = learning::grid_search_knn(data, plan.knn_grid, plan.folds, fold_seed);
    learning::write_cv_table(table, gs);
    c.cv_mean = gs.table[gs.best].mean;
    c.knn = learning::knn_fit(data, gs.best_params().k, gs.best_params().p);
  } else {
    const auto gs = learning::grid_search_svm(data, plan.svm_grid, plan.folds, fold_seed);
    learning::write_cv_table(table, gs);
    c.cv_mean = gs.table[gs.best].mean;
    c.svm = learning::svm_train(data, gs.best_params().C, gs.best_params().gamma);
    if (plan.calibrate) {
      c.svm = learning::svm_calibrate(c.svm, data, plan.folds, child_seed(seed, SeedStream::calibration));
    }
  }
  result.cv_table = table.str();
  return result;
}

sim::Schedule random_schedule(const grid::ScenarioRegistry& registry, std::size_t intervals, double duration,
                              std::uint64_t seed) {
  std::vector<std::vector<int>> pools;
  for (int c = 0; c < kClassCount; ++c) {
    auto ids = registry.ids_of(static_cast<ScenarioClass>(c));
    if (!ids.empty()) pools.push_back(std::move(ids));
  }
  std::mt19937_64 rng(child_seed(seed, SeedStream::schedule_draw));
  sim::Schedule schedule;
  for (std::size_t k = 0; k < intervals; ++k) {
    const auto& pool = pools[std::uniform_int_distribution<std::size_t>(0, pools.size() - 1)(rng)];
    const int id = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    schedule.intervals.push_back({static_cast<int>(k), id, duration});
  }
  return schedule;
}

Json to_json(const sim::Schedule& schedule) {
  Json intervals = Json::array();
  for (const auto& iv : schedule.intervals) {
    intervals.push_back(Json{{"k", iv.k}, {"scenario_id", iv.scenario_id}, {"duration_s", iv.duration}});
  }
  return Json{{"format", "gridshs-schedule"}, {"version", 1}, {"intervals", std::move(intervals)}};
}

sim::Schedule schedule_from_json(const Json& j) {
  check_format(j, "gridshs-schedule", 1);
  sim::Schedule schedule;
  try {
    for (const auto& iv : j.at("intervals")) {
      schedule.intervals.push_back(
          {iv.at("k").get<int>(), iv.at("scenario_id").get<int>(), iv.value("duration_s", 1.0)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::io, std::string("malformed schedule: ") + e.what());
  }
  return schedule;
}

sim::Schedule load_schedule(const std::string& spec, const ModelBank& bank, std::uint64_t seed) {
  const std::string prefix = "random:";
  if (spec.rfind(prefix, 0) == 0) {
    const std::string count = spec.substr(prefix.size());
    if (count.empty() || !std::all_of(count.begin(), count.end(), [](unsigned char ch) { return std::isdigit(ch); })) {
      throw Error(ErrorCategory::invalid_input, "schedule spec must be random:N");
    }
    return random_schedule(bank.registry, std::stoull(count), bank.config.simulation.interval, seed);
  }
  return schedule_from_json(read_json_file(spec));
}

double DetectionReport::accuracy() const {
  if (rows.empty()) return 0.0;
  const auto hits = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.truth == r.predicted; });
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

double DetectionReport::mean_classify_ms() const {
  if (rows.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : rows) sum += r.classify_ms;
  return sum / static_cast<double>(rows.size());
}

DetectionReport run_detection(const ModelBank& bank, const Classifier& classifier, const sim::Schedule& schedule,
                              double sigma, std::uint64_t seed, std::vector<sim::ScheduledWindow>* windows) {
  const std::size_t width = bank.registry.nominal().output_count() + bank.registry.nominal().state_count();
  if (classifier.dimension() != width) {
    throw Error(ErrorCategory::dimension_mismatch, "classifier expects " + std::to_string(classifier.dimension()) +
                                                       " features but the bank produces " + std::to_string(width));
  }
  const auto& cfg = bank.config.simulation;
  auto simulated = sim::simulate_schedule(bank.registry, bank.gains, schedule, cfg, sigma, seed);
  DetectionReport report;
  report.window_s = cfg.window;
  report.sigma = sigma;
  for (const auto& w : simulated) {
    const auto start = std::chrono::steady_clock::now();
    const auto f = features::aggregate(features::error_window(w.monitored, w.nominal));
    const int label = classifier.predict(f.E);
    const auto stop = std::chrono::steady_clock::now();
    DetectionRow row;
    row.k = w.monitored.window;
    row.scenario_id = w.scenario_id;
    row.truth = w.truth;
    row.predicted = class_from_label(label);
    row.max_abs_E = f.E.cwiseAbs().maxCoeff();
    row.classify_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    report.rows.push_back(row);
  }
  if (windows) *windows = std::move(simulated);
  return report;
}

void write_detection_csv(std::ostream& os, const DetectionReport& report) {
  os << "# gridshs-detection v1\n";
  os << std::setprecision(10);
  os << "# window_s=" << report.window_s << "\n# sigma_pu=" << report.sigma << '\n';
  os << "k,scenario_id,true_class,predicted_class,correct,max_abs_E\n";
  for (const auto& r : report.rows) {
    os << r.k << ',' << r.scenario_id << ',' << to_string(r.truth) << ',' << to_string(r.predicted) << ','
       << (r.truth == r.predicted ? 1 : 0) << ',' << r.max_abs_E << '\n';
  }
  os << "# windows=" << report.rows.size() << "\n# accuracy=" << report.accuracy() << '\n';
}

void write_latency_csv(std::ostream& os, const DetectionReport& report) {
  os << "# gridshs-latency v1\n";
  os << "k,classify_ms\n" << std::setprecision(6);
  for (const auto& r : report.rows) os << r.k << ',' << r.classify_ms << '\n';
  os << "# mean_classify_ms=" << report.mean_classify_ms() << "\n# window_s=" << report.window_s << '\n';
}

void write_trace_csv(std::ostream& os, const std::vector<sim::OutputTrace>& traces, std::size_t outputs) {
  os << "window,sample";
  const std::size_t width = traces.empty() ? outputs : static_cast<std::size_t>(traces.front().samples.cols());
  for (std::size_t i = 0; i < outputs; ++i) os << ",y_" << i + 1;
  for (std::size_t i = outputs; i < width; ++i) os << ",xhat_" << i - outputs + 1;
  os << '\n' << std::setprecision(17);
  for (const auto& t : traces) {
    for (Eigen::Index l = 0; l < t.samples.rows(); ++l) {
      os << t.window << ',' << l;
      for (Eigen::Index c = 0; c < t.samples.cols(); ++c) os << ',' << t.samples(l, c);
      os << '\n';
    }
  }
}

std::vector<SpectraRow> spectra_report(const ModelBank& bank, double tol) {
  const auto nominal = spectral::spectral_signature(bank.registry.nominal(), bank.gains);
  std::vector<SpectraRow> rows(bank.registry.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    const auto& s = bank.registry.scenarios[i];
    auto& row = rows[i];
    row.id = s.id;
    row.declared = s.cls;
    row.description = s.description;
    row.islanded = s.islanded;
    row.signature = spectral::spectral_signature(s, bank.gains);
    row.verdict = spectral::classify_by_spectra(row.signature, nominal, tol);
  });
  return rows;
}

std::size_t spectral_disagreements(const std::vector<SpectraRow>& rows) {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.islanded && !r.agrees(); }));
}

void write_spectra_csv(std::ostream& os, const std::vector<SpectraRow>& rows) {
  os << "# gridshs-spectra v1\n";
  os << "id,declared_class,spectral_class,agrees,islanded,description,d1,d2,threshold1,threshold2,lambda1,lambda2\n";
  os << std::setprecision(10);
  for (const auto& r : rows) {
    os << r.id << ',' << to_string(r.declared) << ',' << to_string(r.verdict.cls) << ',' << (r.agrees() ? 1 : 0)
       << ',' << (r.islanded ? 1 : 0) << ',' << quoted(r.description) << ',' << r.verdict.d1 << ',' << r.verdict.d2
       << ',' << r.verdict.threshold1 << ',' << r.verdict.threshold2 << ','
       << quoted(complex_text(r.signature.lambda1)) << ',' << quoted(complex_text(r.signature.lambda2)) << '\n';
  }
  os << "# scenarios=" << rows.size() << "\n# disagreements=" << spectral_disagreements(rows) << '\n';
}

std::vector<std::pair<exogenous::FaultSite, exogenous::SignalFault>> default_fault_set(const ModelBank& bank) {
  using exogenous::FaultSite;
  using exogenous::SignalFault;
  std::vector<std::pair<FaultSite, SignalFault>> faults;
  const auto& nominal = bank.registry.nominal();
  for (std::size_t i = 0; i < nominal.input_count(); ++i) {
    faults.emplace_back(FaultSite::Input, SignalFault::loss(i));
    faults.emplace_back(FaultSite::Input, SignalFault::scale(i, 1.20));
  }
  for (std::size_t i = 0; i < nominal.output_count(); ++i) {
    faults.emplace_back(FaultSite::Output, SignalFault::loss(i));
    faults.emplace_back(FaultSite::Output, SignalFault::scale(i, 1.10));
  }
  return faults;
}

std::vector<EquivalenceCase> run_equivalence(
    const ModelBank& bank, const std::vector<std::pair<exogenous::FaultSite, exogenous::SignalFault>>& faults,
    std::size_t trials, std::uint64_t seed, const exogenous::EquivalenceOptions& options) {
  const auto& nominal = bank.registry.nominal();
  const std::size_t n = nominal.state_count();
  std::vector<EquivalenceCase> cases(faults.size());
  parallel_for(faults.size(), [&](std::size_t f) {
    auto& c = cases[f];
    c.site = faults[f].first;
    c.fault = faults[f].second;
    c.trials = trials;
    c.tolerance = options.tolerance;
    for (std::size_t t = 0; t < trials; ++t) {
      const Vector z = sim::excitation_kick(2 * n, bank.config.simulation, child_seed(seed, SeedStream::equivalence, t));
      const auto report = exogenous::verify_equivalence(nominal, bank.gains, c.site, c.fault, z.head(n), z.tail(n), {},
                                                        options);
      c.worst = std::max(c.worst, report.max_deviation());
    }
  });
  return cases;
}

void write_equivalence_csv(std::ostream& os, const std::vector<EquivalenceCase>& cases) {
  os << "# gridshs-equivalence v1\n";
  os << "site,channel,gain,offset,trials,max_deviation,tolerance,passed\n" << std::setprecision(10);
  for (const auto& c : cases) {
    os << (c.site == exogenous::FaultSite::Input ? "input" : "output") << ',' << c.fault.channel + 1 << ','
       << c.fault.gain << ',' << c.fault.offset << ',' << c.trials << ',' << c.worst << ',' << c.tolerance << ','
       << (c.passed() ? 1 : 0) << '\n';
  }
}

void write_rank_report(std::ostream& os, const ModelBank& bank) {
  os << "# gridshs-rank v1\n";
  const std::size_t n = bank.registry.nominal().state_count();
  os << "id,class,description,states,controllability_rank,observability_rank\n";
  for (const auto& s : bank.registry.scenarios) {
    os << s.id << ',' << to_string(s.cls) << ',' << quoted(s.description) << ',' << n << ','
       << spectral::controllability_rank(s.A, s.B).rank << ',' << spectral::observability_rank(s.A, s.C).rank << '\n';
  }
  os << "# sensor loss audit on the nominal model\n";
  os << "# sensor,observability_rank_without\n";
  for (const auto& a : spectral::sensor_loss_audit(bank.registry.nominal().A, bank.registry.nominal().C)) {
    os << "# " << a.sensor + 1 << ',' << a.rank_without << '\n';
  }
}

}  // namespace gridshs::pipeline
