#pragma once

#include <vector>

#include "gridshs/dataset.hpp"
#include "gridshs/types.hpp"

namespace gridshs::learning {

struct KnnModel {
  Matrix X;  ///< stored rows, one per sample
  std::vector<int> labels;
  std::vector<int> scenario_ids;
  int k = 1;
  double p = 2.0;

  std::size_t size() const { return labels.size(); }
  void validate() const;
};

struct Neighbor {
  std::size_t row = 0;
  double distance = 0.0;
  int label = 0;
  int scenario_id = 0;
};

struct KnnPrediction {
  int label = 0;
  std::vector<Neighbor> neighbors;  ///< nearest first
};

double minkowski_distance(const Vector& a, const Vector& b, double p);

KnnModel knn_fit(const Dataset& data, int k, double p = 2.0);

/// Majority vote over the k nearest rows. Distance ties go to the lower
/// scenario id, then the lower row; vote ties go to the class of the
/// nearest neighbor among the tied classes.
KnnPrediction knn_predict(const KnnModel& model, const Vector& x);

}  // namespace gridshs::learning
