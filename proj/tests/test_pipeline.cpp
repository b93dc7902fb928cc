#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gridshs/error.hpp"
#include "support.hpp"

using namespace gridshs;
using namespace gridshs::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gridshs_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Small KNN trained on a desk dataset, shared by the detection tests.
const Classifier& desk_knn() {
  static const Classifier c = [] {
    DatasetPlan plan;
    plan.rows_per_class = 60;
    plan.sigmas = {1e-3};
    const auto data = generate_dataset(fixture::desk_bank(), plan, 3);
    LearningPlan lp;
    lp.knn_grid = {{1, 2.0}, {3, 2.0}};
    return train_classifier(data, ClassifierKind::Knn, lp, 3).classifier;
  }();
  return c;
}

int run_cli(const std::string& args) {
  const char* cli = std::getenv("GRIDSHS_CLI");
  if (cli == nullptr) return -1;
  const int status = std::system((std::string(cli) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(RunConfig, JsonRoundTrip) {
  const Json j = to_json(desk_config());
  EXPECT_EQ(to_json(config_from_json(j)).dump(), j.dump());
}

TEST(RunConfig, UnknownOrUnitlessKeysAreRejected) {
  Json j = to_json(desk_config());
  j["surprise"] = 1;
  EXPECT_THROW(config_from_json(j), Error);
  Json g = to_json(desk_config().grid);
  auto& line = g["lines"][0];
  line["susceptance"] = line["susceptance_pu"];
  line.erase("susceptance_pu");
  EXPECT_THROW(grid_from_json(g), Error);
}

TEST(RunConfig, PolesAcceptRealAndComplexForms) {
  const Json j = Json::parse(R"([-1.5, [-2.0, 3.0], [-2.0, -3.0]])");
  const auto poles = complex_list_from_json(j);
  ASSERT_EQ(poles.size(), 3u);
  EXPECT_EQ(poles[0], std::complex<double>(-1.5, 0.0));
  EXPECT_EQ(poles[1], std::complex<double>(-2.0, 3.0));
  EXPECT_EQ(complex_list_from_json(complex_list_to_json(poles)), poles);
}

TEST(Bank, JsonRoundTripAndRebuildAreByteIdentical) {
  const auto& bank = fixture::desk_bank();
  const std::string first = to_json(bank).dump();
  EXPECT_EQ(to_json(bank_from_json(to_json(bank))).dump(), first);
  EXPECT_EQ(to_json(build_bank(desk_config())).dump(), first);
}

TEST(Bank, TamperedGridIsDetected) {
  Json j = to_json(fixture::desk_bank());
  j["config"]["grid"]["lines"][0]["susceptance_pu"] = 1.0;
  EXPECT_THROW(bank_from_json(j), Error);
}

TEST(Dataset, OneRowPerClass) {
  DatasetPlan plan;
  plan.rows_per_class = 1;
  const auto d = generate_dataset(fixture::desk_bank(), plan, 1);
  ASSERT_EQ(d.size(), 4u);
  for (const auto n : d.class_counts()) EXPECT_EQ(n, 1u);
  EXPECT_EQ(d.dimension(), 15u);
}

TEST(Dataset, GenerationIsDeterministicAndCyclesSigmas) {
  DatasetPlan plan;
  plan.rows_per_class = 6;
  plan.include_raw = true;
  const auto a = generate_dataset(fixture::desk_bank(), plan, 8);
  const auto b = generate_dataset(fixture::desk_bank(), plan, 8);
  std::ostringstream sa, sb;
  learning::write_dataset_csv(sa, a);
  learning::write_dataset_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  for (const auto& r : a.rows) {
    EXPECT_EQ(r.raw.size(), 15 * 50);
    EXPECT_FALSE(fixture::desk_bank().registry.at(r.scenario_id).islanded);
    EXPECT_EQ(static_cast<int>(fixture::desk_bank().registry.at(r.scenario_id).cls), r.label);
  }
  std::vector<double> sigmas;
  for (std::size_t j = 0; j < 3; ++j) sigmas.push_back(a.rows[j].sigma);
  EXPECT_EQ(sigmas, plan.sigmas);
  const auto c = generate_dataset(fixture::desk_bank(), plan, 9);
  EXPECT_NE(c.rows[0].E, a.rows[0].E);
}

TEST(Classifier, KnnAndSvmSurviveSerialization) {
  DatasetPlan plan;
  plan.rows_per_class = 20;
  const auto data = generate_dataset(fixture::desk_bank(), plan, 4);
  LearningPlan lp;
  lp.knn_grid = {{1, 2.0}, {2, 1.0}};
  lp.svm_grid = {{10.0, 0.1}};
  lp.folds = 3;
  const fs::path dir = scratch_dir("classifier");
  for (const auto kind : {ClassifierKind::Knn, ClassifierKind::Svm}) {
    const auto result = train_classifier(data, kind, lp, 4);
    const std::string path = (dir / (to_string(kind) + ".json")).string();
    write_classifier(path, result.classifier);
    const auto back = read_classifier(path);
    EXPECT_EQ(back.kind, kind);
    EXPECT_EQ(back.dimension(), 15u);
    for (const auto& r : data.rows) EXPECT_EQ(back.predict(r.E), result.classifier.predict(r.E));
    EXPECT_EQ(to_json(back).dump(), to_json(result.classifier).dump());
  }
  EXPECT_THROW(parse_classifier_kind("forest"), Error);
  fs::remove_all(dir);
}

TEST(Schedule, RandomScheduleIsSeededAndSkipsIslands) {
  const auto& reg = fixture::desk_bank().registry;
  const auto a = random_schedule(reg, 200, 1.0, 5);
  const auto b = random_schedule(reg, 200, 1.0, 5);
  ASSERT_EQ(a.intervals.size(), 200u);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(to_json(schedule_from_json(to_json(a))).dump(), to_json(a).dump());
  std::array<int, kClassCount> seen{};
  for (const auto& iv : a.intervals) {
    EXPECT_FALSE(reg.at(iv.scenario_id).islanded);
    ++seen[static_cast<std::size_t>(reg.at(iv.scenario_id).cls)];
  }
  for (const int n : seen) EXPECT_GT(n, 25);
}

TEST(Detection, AllNormalScheduleIsAllNormal) {
  sim::Schedule s;
  for (int k = 0; k < 20; ++k) s.intervals.push_back({k, 0, 1.0});
  const auto report = run_detection(fixture::desk_bank(), desk_knn(), s, 1e-3, 11);
  ASSERT_EQ(report.rows.size(), 20u);
  for (const auto& r : report.rows) EXPECT_EQ(r.predicted, ScenarioClass::Normal);
  EXPECT_DOUBLE_EQ(report.accuracy(), 1.0);
}

TEST(Detection, OneIntervalGivesOneRowAndDeterministicReport) {
  sim::Schedule s;
  s.intervals = {{0, 40, 1.0}};
  const auto a = run_detection(fixture::desk_bank(), desk_knn(), s, 1e-3, 2);
  const auto b = run_detection(fixture::desk_bank(), desk_knn(), s, 1e-3, 2);
  ASSERT_EQ(a.rows.size(), 1u);
  EXPECT_EQ(a.rows[0].truth, ScenarioClass::Control);
  std::ostringstream sa, sb;
  write_detection_csv(sa, a);
  write_detection_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Detection, ClassifierWidthMustMatch) {
  Classifier c = desk_knn();
  c.knn.X = c.knn.X.leftCols(5).eval();
  sim::Schedule s;
  s.intervals = {{0, 0, 1.0}};
  try {
    run_detection(fixture::desk_bank(), c, s, 1e-3, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::dimension_mismatch);
  }
}

TEST(Detection, TraceExportHasHeaderAndOneLinePerSample) {
  sim::Schedule s;
  s.intervals = {{0, 0, 1.0}, {1, 70, 1.0}};
  std::vector<sim::ScheduledWindow> windows;
  run_detection(fixture::desk_bank(), desk_knn(), s, 1e-3, 2, &windows);
  std::vector<sim::OutputTrace> traces;
  for (const auto& w : windows) traces.push_back(w.monitored);
  std::ostringstream os;
  write_trace_csv(os, traces, 5);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("window,sample,y_1,", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 101);
}

TEST(Spectra, NominalRowIsUnmovedAndAllAgree) {
  const auto rows = spectra_report(fixture::desk_bank());
  ASSERT_EQ(rows.size(), fixture::desk_bank().registry.size());
  EXPECT_EQ(rows[0].verdict.d1, 0.0);
  EXPECT_EQ(rows[0].verdict.d2, 0.0);
  EXPECT_EQ(spectral_disagreements(rows), 0u);
}

TEST(Equivalence, DefaultFaultSetPasses) {
  const auto faults = default_fault_set(fixture::desk_bank());
  EXPECT_EQ(faults.size(), 20u);
  const auto cases = run_equivalence(fixture::desk_bank(), faults, 3, 1);
  for (const auto& c : cases) EXPECT_TRUE(c.passed()) << c.worst;
}

TEST(Cli, ExitCodes) {
  if (std::getenv("GRIDSHS_CLI") == nullptr) GTEST_SKIP() << "GRIDSHS_CLI not set";
  const fs::path dir = scratch_dir("cli");
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("spectra"), exit_code(ErrorCategory::invalid_input));
  EXPECT_EQ(run_cli("nonsense-verb"), exit_code(ErrorCategory::invalid_input));
  EXPECT_EQ(run_cli("spectra --bank " + (dir / "missing.json").string()), exit_code(ErrorCategory::io));
  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_NE(run_cli("spectra --bank " + (dir / "broken.json").string()), 0);
  const std::string bank = (dir / "bank.json").string();
  ASSERT_EQ(run_cli("build --grid desk --out " + bank), 0);
  EXPECT_EQ(slurp(bank), to_json(fixture::desk_bank()).dump(2) + "\n");
  EXPECT_EQ(run_cli("rank --bank " + bank + " --out " + (dir / "rank.txt").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "rank.txt"));
  EXPECT_EQ(run_cli("equiv --bank " + bank + " --fault input:9:0.5"), exit_code(ErrorCategory::invalid_input));
  // An offset fault is simulated and reported as not equivalent; that is a result, not an error.
  const std::string report = (dir / "equiv.csv").string();
  EXPECT_EQ(run_cli("equiv --bank " + bank + " --trials 2 --fault input:1:1:0.2 --out " + report), 0);
  EXPECT_EQ(slurp(report).back(), '\n');
  EXPECT_NE(slurp(report).find(",0\n"), std::string::npos);
  fs::remove_all(dir);
}
