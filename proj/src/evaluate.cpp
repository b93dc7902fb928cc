#include "gridshs/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>

#include "gridshs/error.hpp"
#include "gridshs/parallel.hpp"

namespace gridshs::learning {
namespace {

template <typename Params, typename Train>
GridSearchResult<Params> run_grid(const Dataset& data, const std::vector<Params>& grid,
                                  std::size_t folds, std::uint64_t seed, const Train& train) {
  if (grid.empty()) throw Error(ErrorCategory::invalid_input, "grid search needs at least one configuration");
  data.validate();
  stratified_folds(data.labels(), folds, seed);  // feasibility check before fanning out
  GridSearchResult<Params> result;
  result.table.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t c) {
    auto& cell = result.table[c];
    cell.params = grid[c];
    cell.fold_accuracy = cross_validate(data, folds, seed, [&](const Dataset& fit) { return train(fit, grid[c]); });
    cell.mean = std::accumulate(cell.fold_accuracy.begin(), cell.fold_accuracy.end(), 0.0) /
                static_cast<double>(cell.fold_accuracy.size());
  });
  for (std::size_t c = 1; c < result.table.size(); ++c) {
    if (result.table[c].mean > result.table[result.best].mean) result.best = c;
  }
  return result;
}

}  // namespace

double Evaluation::macro_accuracy() const {
  double sum = 0.0;
  int present = 0;
  for (const double r : recall) {
    if (!std::isnan(r)) {
      sum += r;
      ++present;
    }
  }
  return present ? sum / present : 0.0;
}

std::size_t Evaluation::total() const {
  std::size_t t = 0;
  for (const auto& row : confusion) t = std::accumulate(row.begin(), row.end(), t);
  return t;
}

Evaluation evaluate(const Predictor& predict, const Dataset& test) {
  if (test.rows.empty()) throw Error(ErrorCategory::invalid_input, "evaluation needs at least one test row");
  Evaluation ev;
  std::size_t correct = 0;
  for (const auto& row : test.rows) {
    const int pred = predict(row.E);
    if (row.label < 0 || row.label >= kClassCount || pred < 0 || pred >= kClassCount) {
      throw Error(ErrorCategory::invalid_input, "label out of range during evaluation");
    }
    ++ev.confusion[static_cast<std::size_t>(row.label)][static_cast<std::size_t>(pred)];
    if (pred == row.label) ++correct;
  }
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(test.rows.size());
  for (std::size_t c = 0; c < kClassCount; ++c) {
    const auto total = std::accumulate(ev.confusion[c].begin(), ev.confusion[c].end(), std::size_t{0});
    ev.recall[c] = total ? static_cast<double>(ev.confusion[c][c]) / static_cast<double>(total)
                         : std::numeric_limits<double>::quiet_NaN();
  }
  return ev;
}

std::vector<int> stratified_folds(const std::vector<int>& labels, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCategory::invalid_input, "need at least two folds");
  std::array<std::vector<std::size_t>, kClassCount> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= kClassCount) throw Error(ErrorCategory::invalid_input, "label out of range");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  std::vector<int> out(labels.size(), 0);
  std::mt19937_64 rng(seed);
  for (auto& members : by_class) {
    if (members.empty()) continue;
    if (members.size() < folds) {
      throw Error(ErrorCategory::invalid_input, "fold count " + std::to_string(folds) +
                                                    " exceeds the smallest class (" +
                                                    std::to_string(members.size()) + " rows)");
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t j = 0; j < members.size(); ++j) out[members[j]] = static_cast<int>(j % folds);
  }
  return out;
}

Split stratified_split(const std::vector<int>& labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCategory::invalid_input, "test fraction must be in (0, 1)");
  }
  std::array<std::vector<std::size_t>, kClassCount> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= kClassCount) throw Error(ErrorCategory::invalid_input, "label out of range");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  Split split;
  std::mt19937_64 rng(seed);
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
    for (std::size_t j = 0; j < members.size(); ++j) (j < n_test ? split.test : split.train).push_back(members[j]);
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<double> cross_validate(const Dataset& data, std::size_t folds, std::uint64_t seed,
                                   const std::function<Predictor(const Dataset&)>& train) {
  const auto assignment = stratified_folds(data.labels(), folds, seed);
  std::vector<double> acc;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> fit_rows, held;
    for (std::size_t i = 0; i < data.size(); ++i) (assignment[i] == static_cast<int>(f) ? held : fit_rows).push_back(i);
    const Predictor predict = train(data.subset(fit_rows));
    acc.push_back(evaluate(predict, data.subset(held)).accuracy);
  }
  return acc;
}

std::vector<KnnParams> default_knn_grid() {
  std::vector<KnnParams> grid;
  for (const double p : {1.0, 2.0, 3.0}) {
    for (int k = 1; k <= 15; ++k) grid.push_back({k, p});
  }
  return grid;
}

std::vector<SvmParams> default_svm_grid() {
  std::vector<SvmParams> grid;
  for (const double C : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
    for (const double gamma : {0.01, 0.1, 1.0, 10.0}) grid.push_back({C, gamma});
  }
  return grid;
}

GridSearchResult<KnnParams> grid_search_knn(const Dataset& data, const std::vector<KnnParams>& grid,
                                            std::size_t folds, std::uint64_t seed) {
  return run_grid(data, grid, folds, seed, [](const Dataset& fit, const KnnParams& params) -> Predictor {
    auto model = std::make_shared<KnnModel>(knn_fit(fit, params.k, params.p));
    return [model](const Vector& x) { return knn_predict(*model, x).label; };
  });
}

GridSearchResult<SvmParams> grid_search_svm(const Dataset& data, const std::vector<SvmParams>& grid,
                                            std::size_t folds, std::uint64_t seed,
                                            const SvmOptions& options) {
  return run_grid(data, grid, folds, seed, [&options](const Dataset& fit, const SvmParams& params) -> Predictor {
    auto model = std::make_shared<SvmModel>(svm_train(fit, params.C, params.gamma, options));
    return [model](const Vector& x) { return svm_predict(*model, x); };
  });
}

void write_cv_table(std::ostream& os, const GridSearchResult<KnnParams>& result) {
  os << "k,p,mean_accuracy";
  const std::size_t folds = result.table.empty() ? 0 : result.table.front().fold_accuracy.size();
  for (std::size_t f = 0; f < folds; ++f) os << ",fold" << f + 1;
  os << ",best\n" << std::setprecision(10);
  for (std::size_t c = 0; c < result.table.size(); ++c) {
    const auto& cell = result.table[c];
    os << cell.params.k << ',' << cell.params.p << ',' << cell.mean;
    for (const double a : cell.fold_accuracy) os << ',' << a;
    os << ',' << (c == result.best ? 1 : 0) << '\n';
  }
}

void write_cv_table(std::ostream& os, const GridSearchResult<SvmParams>& result) {
  os << "C,gamma,mean_accuracy";
  const std::size_t folds = result.table.empty() ? 0 : result.table.front().fold_accuracy.size();
  for (std::size_t f = 0; f < folds; ++f) os << ",fold" << f + 1;
  os << ",best\n" << std::setprecision(10);
  for (std::size_t c = 0; c < result.table.size(); ++c) {
    const auto& cell = result.table[c];
    os << cell.params.C << ',' << cell.params.gamma << ',' << cell.mean;
    for (const double a : cell.fold_accuracy) os << ',' << a;
    os << ',' << (c == result.best ? 1 : 0) << '\n';
  }
}

}  // namespace gridshs::learning
