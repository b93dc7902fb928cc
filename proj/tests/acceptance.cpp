// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [path-to-gridshs-cli]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "gridshs/features.hpp"
#include "gridshs/seed.hpp"
#include "support.hpp"

using namespace gridshs;
using namespace gridshs::pipeline;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

/// Everything the classifier criteria share: the bank, the 960-row dataset
/// and the tuned models.
struct Shared {
  const ModelBank* bank = nullptr;
  learning::Dataset data;
  double gen_seconds = 0.0;
};

Shared& shared() {
  static Shared s;
  return s;
}

// 1. Spectral class rules over the enumerated bank.
Outcome spectral_separation() {
  const auto t0 = Clock::now();
  const ModelBank bank = build_bank(desk_config());
  const auto rows = spectra_report(bank);
  const double elapsed = seconds_since(t0);
  std::size_t control_bad = 0, measurement_bad = 0, physical_bad = 0, physical_checked = 0;
  for (const auto& r : rows) {
    switch (r.declared) {
      case ScenarioClass::Control:
        control_bad += r.verdict.d2 == 0.0 ? 0 : 1;
        break;
      case ScenarioClass::Measurement:
        measurement_bad += r.verdict.d1 == 0.0 ? 0 : 1;
        break;
      case ScenarioClass::Physical:
        if (!r.islanded) {
          ++physical_checked;
          physical_bad += (r.verdict.d1 > 0.0 && r.verdict.d2 > 0.0) ? 0 : 1;
        }
        break;
      default:
        break;
    }
  }
  const std::size_t disagree = spectral_disagreements(rows);
  std::ostringstream os;
  os << "scenarios=" << rows.size() << " control(d2!=0)=" << control_bad << " measurement(d1!=0)=" << measurement_bad
     << " physical(d1,d2>0 violated)=" << physical_bad << "/" << physical_checked << " rule_disagreements=" << disagree
     << " runtime=" << fmt("%.2f", elapsed) << "s";
  return {rows.size() == 94 && control_bad == 0 && measurement_bad == 0 && physical_bad == 0 && disagree == 0 &&
              elapsed < 10.0,
          os.str()};
}

// 2. Observer poles -6..-15 after optimal matching.
Outcome observer_placement() {
  const auto& bank = *shared().bank;
  ComplexList requested;
  for (int i = 6; i <= 15; ++i) requested.emplace_back(-static_cast<double>(i), 0.0);
  const auto& nom = bank.registry.nominal();
  const ComplexList achieved = spectral::eigenvalues(nom.A + bank.gains.G * nom.C);
  Matrix cost(10, 10);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) cost(i, j) = std::abs(requested[i] - achieved[j]);
  }
  const auto assign = spectral::hungarian_assignment(cost);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) worst = std::max(worst, cost(i, static_cast<Eigen::Index>(assign[i])));
  const bool requested_match = bank.gains.observer_poles == requested;
  std::ostringstream os;
  os << "design_poles_are_-6..-15=" << (requested_match ? "yes" : "no")
     << " max_per_eigenvalue_error=" << fmt("%.3e", worst);
  return {requested_match && worst <= 1e-6, os.str()};
}

// 3. ZOH step and one-second horizon against fine RK4.
Outcome zoh_correctness() {
  const auto& bank = *shared().bank;
  sim::SimConfig cfg;
  const double ts = cfg.sample_period;
  double one_step = 0.0, horizon = 0.0;
  std::mt19937_64 rng(child_seed(17, SeedStream::schedule_kick, 0));
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (const int id : {0, 5, 40, 80}) {
    const auto cl = control::build_closed_loop(bank.registry.at(id), bank.gains, 0.0);
    const auto d = sim::discretize(cl.A_cl, cl.B_cl, ts);
    const Vector z0 = sim::excitation_kick(20, cfg, static_cast<std::uint64_t>(id) + 1);
    Vector w = Vector::Zero(cl.B_cl.cols());
    for (Eigen::Index i = 0; i < 5; ++i) w(i) = u(rng);
    const Vector zoh = d.Ad * z0 + d.Bd * w;
    const Vector rk = fixture::rk4_constant_input(cl.A_cl, cl.B_cl, z0, w, ts / 1000.0, 1000);
    one_step = std::max(one_step, (zoh - rk).cwiseAbs().maxCoeff());

    Vector zd = z0, zr = z0;
    for (int k = 0; k < 50; ++k) {
      zd = d.Ad * zd + d.Bd * w;
      zr = fixture::rk4_constant_input(cl.A_cl, cl.B_cl, zr, w, ts / 1000.0, 1000);
      horizon = std::max(horizon, (zd - zr).cwiseAbs().maxCoeff());
    }
  }
  std::ostringstream os;
  os << "states=20 one_step_max_err=" << fmt("%.3e", one_step) << " one_second_max_err=" << fmt("%.3e", horizon);
  return {one_step <= 1e-9 && horizon <= 1e-6, os.str()};
}

// 4. Faulted signals vs switched matrices.
Outcome exogenous_equivalence() {
  const auto& bank = *shared().bank;
  const auto cases = run_equivalence(bank, default_fault_set(bank), 50, bank.config.seed);
  double worst = 0.0;
  std::size_t failed = 0;
  for (const auto& c : cases) {
    worst = std::max(worst, c.worst);
    failed += c.passed() ? 0 : 1;
  }
  std::ostringstream os;
  os << "faults=" << cases.size() << " initial_conditions=50 horizon=1s failed=" << failed
     << " worst_deviation=" << fmt("%.3e", worst);
  return {failed == 0 && worst <= 1e-9 && cases.size() == 20, os.str()};
}

// 5. Tuned KNN and SVM on the 960-row dataset.
struct ClassifierNumbers {
  double knn_cv = 0.0;
  double knn_held_out = 0.0;
  double svm_cv = 0.0;
  double svm_held_out = 0.0;
  Classifier knn_full;
};

ClassifierNumbers& classifier_numbers() {
  static ClassifierNumbers n;
  return n;
}

Outcome classifier_accuracy() {
  auto& s = shared();
  const auto& bank = *s.bank;
  const auto t0 = Clock::now();
  s.data = generate_dataset(bank, bank.config.dataset, bank.config.seed);
  s.gen_seconds = seconds_since(t0);
  const auto& data = s.data;
  const LearningPlan& plan = bank.config.learning;
  auto& n = classifier_numbers();

  // 5-fold CV of the tuned KNN on every row.
  const auto knn_grid = learning::grid_search_knn(data, plan.knn_grid, plan.folds,
                                                  child_seed(bank.config.seed, SeedStream::folds));
  n.knn_cv = knn_grid.table[knn_grid.best].mean;

  // Held-out: tune on 80%, score on the untouched 20%.
  const auto split = learning::stratified_split(data.labels(), 0.2, child_seed(bank.config.seed, SeedStream::split));
  const auto train = data.subset(split.train);
  const auto test = data.subset(split.test);
  const auto knn = train_classifier(train, ClassifierKind::Knn, plan, bank.config.seed);
  const auto svm = train_classifier(train, ClassifierKind::Svm, plan, bank.config.seed);
  auto score = [&](const Classifier& c) {
    return learning::evaluate([&](const Vector& x) { return c.predict(x); }, test).accuracy;
  };
  n.knn_held_out = score(knn.classifier);
  n.svm_held_out = score(svm.classifier);
  n.svm_cv = svm.classifier.cv_mean;

  // Models refit on every row, used by the detection criterion.
  n.knn_full = train_classifier(data, ClassifierKind::Knn, plan, bank.config.seed).classifier;
  const double elapsed = seconds_since(t0);

  const auto& kp = knn_grid.best_params();
  std::ostringstream os;
  os << "rows=" << data.size() << " knn(k=" << kp.k << ",p=" << kp.p << ") cv5=" << fmt("%.4f", n.knn_cv)
     << " knn_held_out=" << fmt("%.4f", n.knn_held_out) << " svm(C=" << svm.classifier.svm.C
     << ",gamma=" << svm.classifier.svm.gamma << ",calibrated=" << (svm.classifier.svm.calibration.enabled ? 1 : 0)
     << ") svm_held_out=" << fmt("%.4f", n.svm_held_out) << " svm_cv5_train=" << fmt("%.4f", n.svm_cv)
     << " knn_cv5_train=" << fmt("%.4f", knn.classifier.cv_mean) << " gen=" << fmt("%.1f", s.gen_seconds)
     << "s gen+train=" << fmt("%.1f", elapsed) << "s";
  const auto counts = data.class_counts();
  const bool counts_ok =
      data.size() == 960 && std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c == 240; });
  return {counts_ok && n.knn_cv >= 0.95 && n.knn_held_out >= 0.95 && n.svm_held_out >= 0.80 &&
              n.knn_held_out >= n.svm_held_out && elapsed <= 600.0,
          os.str()};
}

// 6. Random 100-interval schedule classified window by window.
Outcome schedule_detection() {
  const auto& bank = *shared().bank;
  const auto& knn = classifier_numbers().knn_full;
  if (knn.dimension() == 0) return {false, "no classifier (criterion 5 did not produce one)"};
  const auto schedule = load_schedule("random:100", bank, bank.config.seed);
  const auto report = run_detection(bank, knn, schedule, bank.config.control.sigma, bank.config.seed);
  std::ostringstream os;
  os << "windows=" << report.rows.size() << " window=" << report.window_s << "s sigma=" << report.sigma
     << " accuracy=" << fmt("%.4f", report.accuracy()) << " mean_classify_ms=" << fmt("%.3f", report.mean_classify_ms());
  return {report.rows.size() == 100 && report.accuracy() >= 0.95 && report.mean_classify_ms() <= 50.0, os.str()};
}

// 7a. KNN against brute force on 200 random rows.
bool knn_oracle(std::string& note) {
  std::mt19937_64 rng(2718);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> lab(0, kClassCount - 1);
  learning::Dataset d;
  for (int i = 0; i < 200; ++i) {
    learning::DatasetRow r;
    r.E = Vector(6);
    for (int j = 0; j < 6; ++j) r.E(j) = g(rng);
    r.label = lab(rng);
    r.scenario_id = i;
    d.rows.push_back(r);
  }
  std::size_t mismatches = 0, checks = 0;
  for (const int k : {1, 3, 5, 8}) {
    for (const double p : {1.0, 2.0, 3.0}) {
      const auto model = learning::knn_fit(d, k, p);
      for (int q = 0; q < 50; ++q) {
        Vector x(6);
        for (int j = 0; j < 6; ++j) x(j) = g(rng);
        std::vector<std::pair<double, std::size_t>> all;
        for (std::size_t i = 0; i < d.size(); ++i) {
          double s = 0.0;
          for (int j = 0; j < 6; ++j) s += std::pow(std::abs(d.rows[i].E(j) - x(j)), p);
          all.emplace_back(std::pow(s, 1.0 / p), i);  // scenario id equals row here
        }
        std::sort(all.begin(), all.end());
        std::array<int, kClassCount> votes{};
        for (int i = 0; i < k; ++i) ++votes[static_cast<std::size_t>(d.rows[all[i].second].label)];
        const int top = *std::max_element(votes.begin(), votes.end());
        int expected = -1;
        for (int i = 0; i < k && expected < 0; ++i) {
          const int l = d.rows[all[i].second].label;
          if (votes[static_cast<std::size_t>(l)] == top) expected = l;
        }
        ++checks;
        mismatches += learning::knn_predict(model, x).label == expected ? 0 : 1;
      }
    }
  }
  note += " knn_oracle=" + std::to_string(checks - mismatches) + "/" + std::to_string(checks);
  return mismatches == 0;
}

// 7b. Dual feasibility of every one-vs-rest machine.
bool svm_feasibility(std::string& note) {
  const auto& data = shared().data;
  const auto model = learning::svm_train(data, 100.0, 0.1);
  double worst_eq = 0.0, worst_box = 0.0;
  for (const auto& m : model.machines) {
    worst_eq = std::max(worst_eq, std::abs(m.alpha.dot(m.y)));
    worst_box = std::max({worst_box, -m.alpha.minCoeff(), m.alpha.maxCoeff() - model.C});
  }
  note += " svm_sum_alpha_y=" + fmt("%.2e", worst_eq) + " svm_box_violation=" + fmt("%.2e", std::max(0.0, worst_box));
  return worst_eq <= 1e-8 && worst_box <= 1e-8;
}

// 7c. E_i >= ln(eps), equality exactly on zero error columns.
bool feature_bound(std::string& note) {
  const auto& bank = *shared().bank;
  std::size_t violations = 0, columns = 0, zero_columns = 0;
  sim::Schedule s;
  for (int k = 0; k < 8; ++k) s.intervals.push_back({k, k * 11 % 94, 1.0});
  const auto windows = sim::simulate_schedule(bank.registry, bank.gains, s, bank.config.simulation, 0.0, 99);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto check = [&](const features::ErrorWindow& e) {
    const auto f = features::aggregate(e);
    for (Eigen::Index c = 0; c < e.e.cols(); ++c) {
      ++columns;
      const bool zero = e.e.col(c).isZero(0.0);
      zero_columns += zero ? 1 : 0;
      const bool at_bound = f.E(c) == std::log(features::kDefaultEpsilon);
      if (f.E(c) < std::log(features::kDefaultEpsilon) || at_bound != zero) ++violations;
    }
  };
  for (const auto& w : windows) check(features::error_window(w.monitored, w.nominal));
  for (int t = 0; t < 200; ++t) {
    Matrix e = Matrix::Zero(50, 15);
    for (Eigen::Index c = 0; c < 15; ++c) {
      if (u(rng) < 0.3) continue;
      for (Eigen::Index r = 0; r < 50; ++r) e(r, c) = u(rng) < 0.8 ? 0.0 : std::pow(10.0, -14.0 * u(rng));
    }
    check({e, t});
  }
  note += " feature_bound_violations=" + std::to_string(violations) + "/" + std::to_string(columns) +
          " (zero_columns=" + std::to_string(zero_columns) + ")";
  return violations == 0;
}

// 7d. Hungarian distance against permutations.
bool matching_oracle(std::string& note) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 2.0);
  double worst = 0.0;
  for (std::size_t n = 1; n <= 8; ++n) {
    for (int t = 0; t < 5; ++t) {
      ComplexList a, b;
      for (std::size_t i = 0; i < n; ++i) {
        a.emplace_back(g(rng), g(rng));
        b.emplace_back(g(rng), g(rng));
      }
      worst = std::max(worst, std::abs(spectral::eigenset_distance(a, b) - fixture::brute_force_matching(a, b)));
    }
  }
  note += " matching_max_diff=" + fmt("%.1e", worst);
  return worst <= 1e-12;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 7e. Two complete CLI runs with the same seed write identical files.
bool pipeline_determinism(const std::string& cli, std::string& note) {
  if (cli.empty()) {
    note += " determinism=skipped(no cli path)";
    return false;
  }
  const fs::path root = fs::temp_directory_path() / ("gridshs_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  auto run = [&](const fs::path& dir) {
    fs::create_directories(dir);
    const std::string d = dir.string();
    const std::vector<std::string> steps = {
        "build --grid desk --seed 7 --out " + d + "/bank.json",
        "gen-dataset --bank " + d + "/bank.json --seed 7 --rows-per-class 60 --out " + d + "/dataset.csv",
        "train --data " + d + "/dataset.csv --classifier knn --seed 7 --out " + d + "/knn",
        "train --data " + d + "/dataset.csv --classifier svm --seed 7 --out " + d + "/svm",
        "detect --bank " + d + "/bank.json --classifier " + d + "/knn/classifier.json --schedule random:30 --seed 7 --out " +
            d + "/detect_knn",
        "detect --bank " + d + "/bank.json --classifier " + d + "/svm/classifier.json --schedule random:30 --seed 7 --out " +
            d + "/detect_svm",
        "spectra --bank " + d + "/bank.json --out " + d + "/spectra.csv",
        "equiv --bank " + d + "/bank.json --trials 5 --seed 7 --out " + d + "/equiv.csv",
        "rank --bank " + d + "/bank.json --out " + d + "/rank.txt",
    };
    for (const auto& s : steps) {
      const int status = std::system((cli + " " + s + " >/dev/null 2>&1").c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return false;
    }
    return true;
  };
  if (!run(root / "a") || !run(root / "b")) {
    note += " determinism=cli_failed";
    fs::remove_all(root);
    return false;
  }
  std::size_t files = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file() || entry.path().filename() == "latency.csv") continue;
    const fs::path other = root / "b" / fs::relative(entry.path(), root / "a");
    ++files;
    differing += slurp(entry.path()) == slurp(other) ? 0 : 1;
  }
  fs::remove_all(root);
  note += " determinism_identical_files=" + std::to_string(files - differing) + "/" + std::to_string(files);
  return files > 0 && differing == 0;
}

Outcome property_suites(const std::string& cli) {
  std::string note;
  bool ok = knn_oracle(note);
  ok = svm_feasibility(note) && ok;
  ok = feature_bound(note) && ok;
  ok = matching_oracle(note) && ok;
  ok = pipeline_determinism(cli, note) && ok;
  return {ok, note.substr(1)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  static const ModelBank bank = build_bank(desk_config());
  shared().bank = &bank;

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 spectral separation", spectral_separation},
      {"2 observer pole placement", observer_placement},
      {"3 ZOH correctness", zoh_correctness},
      {"4 exogenous equivalence", exogenous_equivalence},
      {"5 classifier accuracy", classifier_accuracy},
      {"6 schedule detection", schedule_detection},
      {"7 property suites", [&] { return property_suites(cli); }},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
