#include "gridshs/knn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <tuple>

#include "gridshs/error.hpp"

namespace gridshs::learning {
namespace {

// sum |a_i - b_i|^p; monotone in the distance, so it orders neighbors.
double minkowski_power(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Vector& b, double p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    const double d = std::abs(a(i) - b(i));
    if (p == 1.0) s += d;
    else if (p == 2.0) s += d * d;
    else s += std::pow(d, p);
  }
  return s;
}

double root(double power_sum, double p) {
  if (p == 1.0) return power_sum;
  if (p == 2.0) return std::sqrt(power_sum);
  return std::pow(power_sum, 1.0 / p);
}

}  // namespace

void KnnModel::validate() const {
  if (labels.empty()) throw Error(ErrorCategory::invalid_input, "KNN model holds no rows");
  if (static_cast<std::size_t>(X.rows()) != labels.size() || scenario_ids.size() != labels.size()) {
    throw Error(ErrorCategory::dimension_mismatch, "KNN rows, labels and ids differ in length");
  }
  if (k < 1 || static_cast<std::size_t>(k) > labels.size()) {
    throw Error(ErrorCategory::invalid_input, "k must be in [1, #rows]");
  }
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorCategory::invalid_input, "Minkowski p must be >= 1");
}

double minkowski_distance(const Vector& a, const Vector& b, double p) {
  if (a.size() != b.size()) throw Error(ErrorCategory::dimension_mismatch, "distance between vectors of different size");
  return root(minkowski_power(a.transpose(), b, p), p);
}

KnnModel knn_fit(const Dataset& data, int k, double p) {
  data.validate();
  KnnModel model{data.features(), data.labels(), data.scenario_ids(), k, p};
  model.validate();
  return model;
}

KnnPrediction knn_predict(const KnnModel& model, const Vector& x) {
  model.validate();
  if (x.size() != model.X.cols()) {
    throw Error(ErrorCategory::dimension_mismatch, "query has " + std::to_string(x.size()) +
                                                       " features, model expects " +
                                                       std::to_string(model.X.cols()));
  }
  const std::size_t n = model.size();
  std::vector<std::tuple<double, int, std::size_t>> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    order[i] = {minkowski_power(model.X.row(static_cast<Eigen::Index>(i)), x, model.p),
                model.scenario_ids[i], i};
  }
  const auto k = static_cast<std::size_t>(model.k);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end());

  KnnPrediction out;
  std::array<int, kClassCount> votes{};
  for (std::size_t j = 0; j < k; ++j) {
    const auto [power, sid, row] = order[j];
    out.neighbors.push_back({row, root(power, model.p), model.labels[row], sid});
    const int label = model.labels[row];
    if (label < 0 || label >= kClassCount) throw Error(ErrorCategory::invalid_input, "stored label out of range");
    ++votes[static_cast<std::size_t>(label)];
  }
  const int top = *std::max_element(votes.begin(), votes.end());
  for (const auto& nb : out.neighbors) {
    if (votes[static_cast<std::size_t>(nb.label)] == top) {
      out.label = nb.label;
      break;
    }
  }
  return out;
}

}  // namespace gridshs::learning
