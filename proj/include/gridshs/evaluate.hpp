#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "gridshs/dataset.hpp"
#include "gridshs/knn.hpp"
#include "gridshs/svm.hpp"
#include "gridshs/types.hpp"

namespace gridshs::learning {

using Confusion = std::array<std::array<std::size_t, kClassCount>, kClassCount>;

struct Evaluation {
  double accuracy = 0.0;
  Confusion confusion{};  ///< rows = true class, columns = predicted
  std::array<double, kClassCount> recall{};  ///< NaN for classes absent from the test rows
  double macro_accuracy() const;
  std::size_t total() const;
};

using Predictor = std::function<int(const Vector&)>;

Evaluation evaluate(const Predictor& predict, const Dataset& test);

/// Fold index per row; each class is shuffled with `seed` and dealt
/// round-robin. Throws when folds exceed the smallest present class.
std::vector<int> stratified_folds(const std::vector<int>& labels, std::size_t folds, std::uint64_t seed);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified split; about `test_fraction` of each class goes to test.
Split stratified_split(const std::vector<int>& labels, double test_fraction, std::uint64_t seed);

struct KnnParams {
  int k = 1;
  double p = 2.0;
};

struct SvmParams {
  double C = 1.0;
  double gamma = 1.0;
};

template <typename Params>
struct CvCell {
  Params params;
  std::vector<double> fold_accuracy;
  double mean = 0.0;
};

template <typename Params>
struct GridSearchResult {
  std::vector<CvCell<Params>> table;
  std::size_t best = 0;  ///< first cell with the largest mean
  const Params& best_params() const { return table.at(best).params; }
};

std::vector<KnnParams> default_knn_grid();
std::vector<SvmParams> default_svm_grid();

/// Stratified k-fold CV accuracy of every cell; cells run in parallel.
GridSearchResult<KnnParams> grid_search_knn(const Dataset& data, const std::vector<KnnParams>& grid,
                                            std::size_t folds, std::uint64_t seed);
GridSearchResult<SvmParams> grid_search_svm(const Dataset& data, const std::vector<SvmParams>& grid,
                                            std::size_t folds, std::uint64_t seed,
                                            const SvmOptions& options = {});

/// Per-fold accuracies of one configuration, without the grid machinery.
std::vector<double> cross_validate(const Dataset& data, std::size_t folds, std::uint64_t seed,
                                   const std::function<Predictor(const Dataset&)>& train);

void write_cv_table(std::ostream& os, const GridSearchResult<KnnParams>& result);
void write_cv_table(std::ostream& os, const GridSearchResult<SvmParams>& result);

}  // namespace gridshs::learning
