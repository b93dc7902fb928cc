// gridshs: command-line front end for the contingency-detection pipeline.
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridshs/error.hpp"
#include "gridshs/pipeline.hpp"

namespace fs = std::filesystem;
using namespace gridshs;
using namespace gridshs::pipeline;

namespace {

struct Options {
  std::string grid = "desk";
  std::string bank;
  std::string data;
  std::string classifier;
  std::string schedule = "random:100";
  std::optional<std::uint64_t> seed;
  std::vector<double> sigmas;
  std::string out;
  std::optional<std::size_t> rows_per_class;
  bool raw = false;
  std::size_t trials = 50;
  std::vector<std::string> faults;
};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error(ErrorCategory::io, "cannot write " + path.string());
  return os;
}

void write_text(const fs::path& path, const std::string& text) {
  auto os = open_out(path);
  os << text;
  if (!os) throw Error(ErrorCategory::io, "write failed: " + path.string());
}

// Report verbs write to --out when given, stdout otherwise.
template <typename Writer>
void emit(const std::string& out, Writer&& writer) {
  if (out.empty() || out == "-") {
    writer(std::cout);
    return;
  }
  auto os = open_out(out);
  writer(os);
  if (!os) throw Error(ErrorCategory::io, "write failed: " + out);
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(ErrorCategory::invalid_input, std::string("missing required flag ") + flag);
}

std::pair<exogenous::FaultSite, exogenous::SignalFault> parse_fault(const std::string& text) {
  // site:channel:gain[:offset], channel counted from 1.
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() < 3 || parts.size() > 4 || (parts[0] != "input" && parts[0] != "output")) {
    throw Error(ErrorCategory::invalid_input, "fault must be input|output:channel:gain[:offset], got '" + text + "'");
  }
  try {
    const long channel = std::stol(parts[1]);
    if (channel < 1) throw Error(ErrorCategory::invalid_input, "fault channel counts from 1");
    exogenous::SignalFault f{static_cast<std::size_t>(channel - 1), std::stod(parts[2]),
                             parts.size() == 4 ? std::stod(parts[3]) : 0.0};
    return {parts[0] == "input" ? exogenous::FaultSite::Input : exogenous::FaultSite::Output, f};
  } catch (const std::logic_error&) {
    throw Error(ErrorCategory::invalid_input, "bad number in fault '" + text + "'");
  }
}

int cmd_build(const Options& o) {
  RunConfig config = load_config(o.grid);
  if (o.seed) config.seed = *o.seed;
  const ModelBank bank = build_bank(config);
  const std::string out = o.out.empty() ? "bank.json" : o.out;
  write_text(out, to_json(bank).dump(2) + "\n");
  std::cout << "scenarios=" << bank.registry.size() << " normal=" << bank.registry.count(ScenarioClass::Normal)
            << " physical=" << bank.registry.count(ScenarioClass::Physical)
            << " control=" << bank.registry.count(ScenarioClass::Control)
            << " measurement=" << bank.registry.count(ScenarioClass::Measurement) << " bank=" << out << '\n';
  return 0;
}

int cmd_gen_dataset(const Options& o) {
  require(o.bank, "--bank");
  const ModelBank bank = read_bank(o.bank);
  DatasetPlan plan = bank.config.dataset;
  if (!o.sigmas.empty()) plan.sigmas = o.sigmas;
  if (o.rows_per_class) plan.rows_per_class = *o.rows_per_class;
  if (o.raw) plan.include_raw = true;
  const auto data = generate_dataset(bank, plan, o.seed.value_or(bank.config.seed));
  const std::string out = o.out.empty() ? "dataset.csv" : o.out;
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  learning::write_dataset_csv(out, data);
  const auto skipped = bank.registry.size() - [&] {
    std::size_t usable = 0;
    for (int c = 0; c < kClassCount; ++c) usable += bank.registry.ids_of(static_cast<ScenarioClass>(c)).size();
    return usable;
  }();
  if (skipped) std::cerr << "note: " << skipped << " islanded scenario(s) skipped\n";
  std::cout << "rows=" << data.size() << " dimension=" << data.dimension() << " dataset=" << out << '\n';
  return 0;
}

int cmd_train(const Options& o) {
  require(o.data, "--data");
  const auto data = learning::read_dataset_csv(o.data);
  const auto kind = parse_classifier_kind(o.classifier.empty() ? "knn" : o.classifier);
  const LearningPlan plan = load_config(o.grid).learning;
  const auto result = train_classifier(data, kind, plan, o.seed.value_or(data.provenance.seed));
  const fs::path dir = o.out.empty() ? fs::path("model") : fs::path(o.out);
  fs::create_directories(dir);
  write_text(dir / "classifier.json", to_json(result.classifier).dump(2) + "\n");
  write_text(dir / "cv_table.csv", result.cv_table);
  std::cout << "classifier=" << to_string(kind) << " cv_mean_accuracy=" << std::setprecision(6)
            << result.classifier.cv_mean;
  if (kind == ClassifierKind::Knn) {
    std::cout << " k=" << result.classifier.knn.k << " p=" << result.classifier.knn.p;
  } else {
    std::cout << " C=" << result.classifier.svm.C << " gamma=" << result.classifier.svm.gamma
              << " calibrated=" << (result.classifier.svm.calibration.enabled ? 1 : 0);
  }
  std::cout << " out=" << dir.string() << '\n';
  return 0;
}

int cmd_detect(const Options& o) {
  require(o.bank, "--bank");
  require(o.classifier, "--classifier");
  const ModelBank bank = read_bank(o.bank);
  const Classifier classifier = read_classifier(o.classifier);
  const std::uint64_t seed = o.seed.value_or(bank.config.seed);
  const auto schedule = load_schedule(o.schedule, bank, seed);
  if (o.sigmas.size() > 1) throw Error(ErrorCategory::invalid_input, "detect takes a single --sigma");
  const double sigma = o.sigmas.empty() ? bank.config.control.sigma : o.sigmas.front();
  std::vector<sim::ScheduledWindow> windows;
  const auto report = run_detection(bank, classifier, schedule, sigma, seed, &windows);
  const fs::path dir = o.out.empty() ? fs::path("detect") : fs::path(o.out);
  fs::create_directories(dir);
  write_text(dir / "schedule.json", to_json(schedule).dump(2) + "\n");
  {
    auto os = open_out(dir / "detections.csv");
    write_detection_csv(os, report);
  }
  {
    auto os = open_out(dir / "latency.csv");
    write_latency_csv(os, report);
  }
  {
    std::vector<sim::OutputTrace> traces;
    for (const auto& w : windows) traces.push_back(w.monitored);
    auto os = open_out(dir / "traces.csv");
    write_trace_csv(os, traces, bank.registry.nominal().output_count());
  }
  std::cout << "windows=" << report.rows.size() << " accuracy=" << std::setprecision(6) << report.accuracy()
            << " mean_classify_ms=" << report.mean_classify_ms() << " out=" << dir.string() << '\n';
  return 0;
}

int cmd_spectra(const Options& o) {
  require(o.bank, "--bank");
  const auto rows = spectra_report(read_bank(o.bank));
  emit(o.out, [&](std::ostream& os) { write_spectra_csv(os, rows); });
  std::cerr << "scenarios=" << rows.size() << " disagreements=" << spectral_disagreements(rows) << '\n';
  return 0;
}

int cmd_equiv(const Options& o) {
  require(o.bank, "--bank");
  const ModelBank bank = read_bank(o.bank);
  std::vector<std::pair<exogenous::FaultSite, exogenous::SignalFault>> faults;
  for (const auto& f : o.faults) faults.push_back(parse_fault(f));
  if (faults.empty()) faults = default_fault_set(bank);
  const auto cases = run_equivalence(bank, faults, o.trials, o.seed.value_or(bank.config.seed));
  emit(o.out, [&](std::ostream& os) { write_equivalence_csv(os, cases); });
  std::size_t failed = 0;
  for (const auto& c : cases) failed += c.passed() ? 0 : 1;
  std::cerr << "faults=" << cases.size() << " failed=" << failed << '\n';
  return 0;
}

int cmd_rank(const Options& o) {
  require(o.bank, "--bank");
  const ModelBank bank = read_bank(o.bank);
  emit(o.out, [&](std::ostream& os) { write_rank_report(os, bank); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contingency detection on a switched linear grid model"};
  app.require_subcommand(1);
  Options o;

  auto seed_opt = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { o.seed = s; }, "Master seed");
  };
  auto* build = app.add_subcommand("build", "Enumerate scenarios, design gains, write the model bank");
  build->add_option("--grid", o.grid, "Run config file, or 'desk' for the built-in 30-bus setup");
  seed_opt(build);
  build->add_option("--out", o.out, "Bank file (default bank.json)");

  auto* gen = app.add_subcommand("gen-dataset", "Simulate labelled feature rows");
  gen->add_option("--bank", o.bank, "Model bank file");
  seed_opt(gen);
  gen->add_option("--sigma", o.sigmas, "Noise level, p.u. (repeatable)");
  gen->add_option_function<std::size_t>("--rows-per-class", [&](std::size_t n) { o.rows_per_class = n; },
                                        "Rows per class");
  gen->add_flag("--raw", o.raw, "Also export raw error sequences");
  gen->add_option("--out", o.out, "Dataset file (default dataset.csv)");

  auto* train = app.add_subcommand("train", "Grid-search, fit and save a classifier");
  train->add_option("--data", o.data, "Dataset file");
  train->add_option("--classifier", o.classifier, "knn or svm (default knn)");
  train->add_option("--grid", o.grid, "Run config whose learning section sets the grids");
  seed_opt(train);
  train->add_option("--out", o.out, "Output directory (default model)");

  auto* detect = app.add_subcommand("detect", "Classify the windows of a switching schedule");
  detect->add_option("--bank", o.bank, "Model bank file");
  detect->add_option("--classifier", o.classifier, "Classifier file");
  detect->add_option("--schedule", o.schedule, "Schedule file or random:N (default random:100)");
  seed_opt(detect);
  detect->add_option("--sigma", o.sigmas, "Noise level, p.u.");
  detect->add_option("--out", o.out, "Output directory (default detect)");

  auto* spectra = app.add_subcommand("spectra", "Closed-loop eigenvalue table per scenario");
  spectra->add_option("--bank", o.bank, "Model bank file");
  spectra->add_option("--out", o.out, "Report file (default stdout)");

  auto* equiv = app.add_subcommand("equiv", "Co-simulate faulted signals against mapped models");
  equiv->add_option("--bank", o.bank, "Model bank file");
  seed_opt(equiv);
  equiv->add_option("--fault", o.faults, "input|output:channel:gain[:offset] (repeatable)");
  equiv->add_option("--trials", o.trials, "Initial conditions per fault (default 50)");
  equiv->add_option("--out", o.out, "Report file (default stdout)");

  auto* rank = app.add_subcommand("rank", "Controllability and observability ranks");
  rank->add_option("--bank", o.bank, "Model bank file");
  rank->add_option("--out", o.out, "Report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[" << to_string(ErrorCategory::invalid_input) << "]: " << e.what() << '\n';
    return exit_code(ErrorCategory::invalid_input);
  }

  try {
    if (*build) return cmd_build(o);
    if (*gen) return cmd_gen_dataset(o);
    if (*train) return cmd_train(o);
    if (*detect) return cmd_detect(o);
    if (*spectra) return cmd_spectra(o);
    if (*equiv) return cmd_equiv(o);
    if (*rank) return cmd_rank(o);
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.category()) << "]: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error[" << to_string(ErrorCategory::io) << "]: " << e.what() << '\n';
    return exit_code(ErrorCategory::io);
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
