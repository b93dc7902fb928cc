#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gridshs/types.hpp"

namespace gridshs::learning {

struct DatasetRow {
  Vector E;
  int window = 0;
  int label = 0;
  int scenario_id = 0;
  double sigma = 0.0;
  /// Optional flattened error window; empty when not exported.
  Vector raw;
};

struct Provenance {
  std::uint64_t seed = 0;
  std::vector<double> sigmas;
  std::string grid_hash;
  std::size_t rows_per_class = 0;
};

struct Dataset {
  std::vector<DatasetRow> rows;
  Provenance provenance;

  std::size_t size() const { return rows.size(); }
  std::size_t dimension() const { return rows.empty() ? 0 : static_cast<std::size_t>(rows.front().E.size()); }
  std::array<std::size_t, kClassCount> class_counts() const;
  /// Rows stacked as an N x d matrix.
  Matrix features() const;
  std::vector<int> labels() const;
  std::vector<int> scenario_ids() const;
  Dataset subset(const std::vector<std::size_t>& indices) const;
  /// Throws Error(invalid_input) on mixed dimensions, bad labels or
  /// non-finite features.
  void validate() const;
};

/// Delimited text: '#' provenance lines, a header, then one row per sample:
/// window_id, scenario_id, class_label, sigma, E_1..E_d, optional raw_1..raw_m.
void write_dataset_csv(std::ostream& os, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(std::istream& is);
Dataset read_dataset_csv(const std::string& path);

/// FNV-1a 64 of a byte string, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace gridshs::learning
