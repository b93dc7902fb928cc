#include "gridshs/dataset.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "gridshs/error.hpp"

namespace gridshs::learning {
namespace {

constexpr const char* kMagic = "# gridshs-dataset v1";

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw Error(ErrorCategory::io, "bad number in dataset: '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  const double v = parse_double(s);
  if (v != std::floor(v)) throw Error(ErrorCategory::io, "expected an integer in dataset: '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace

std::array<std::size_t, kClassCount> Dataset::class_counts() const {
  std::array<std::size_t, kClassCount> counts{};
  for (const auto& r : rows) {
    if (r.label >= 0 && r.label < kClassCount) ++counts[static_cast<std::size_t>(r.label)];
  }
  return counts;
}

Matrix Dataset::features() const {
  Matrix X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dimension()));
  for (std::size_t i = 0; i < rows.size(); ++i) X.row(static_cast<Eigen::Index>(i)) = rows[i].E.transpose();
  return X;
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.label);
  return out;
}

std::vector<int> Dataset::scenario_ids() const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.scenario_id);
  return out;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.provenance = provenance;
  out.rows.reserve(indices.size());
  for (const std::size_t i : indices) out.rows.push_back(rows.at(i));
  return out;
}

void Dataset::validate() const {
  const std::size_t d = dimension();
  const std::size_t raw = rows.empty() ? 0 : static_cast<std::size_t>(rows.front().raw.size());
  for (const auto& r : rows) {
    if (static_cast<std::size_t>(r.E.size()) != d || d == 0) {
      throw Error(ErrorCategory::dimension_mismatch, "dataset rows have mixed feature dimensions");
    }
    if (static_cast<std::size_t>(r.raw.size()) != raw) {
      throw Error(ErrorCategory::dimension_mismatch, "dataset rows have mixed raw lengths");
    }
    if (r.label < 0 || r.label >= kClassCount) throw Error(ErrorCategory::invalid_input, "dataset label out of range");
    if (!r.E.allFinite()) throw Error(ErrorCategory::invalid_input, "dataset feature is not finite");
  }
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  data.validate();
  const std::size_t d = data.dimension();
  const std::size_t m = data.rows.empty() ? 0 : static_cast<std::size_t>(data.rows.front().raw.size());
  os << kMagic << '\n';
  os << "# seed=" << data.provenance.seed << '\n';
  os << "# sigmas=";
  for (std::size_t i = 0; i < data.provenance.sigmas.size(); ++i) {
    os << (i ? ";" : "") << std::setprecision(17) << data.provenance.sigmas[i];
  }
  os << '\n';
  os << "# grid_hash=" << data.provenance.grid_hash << '\n';
  os << "# rows_per_class=" << data.provenance.rows_per_class << '\n';
  os << "window_id,scenario_id,class_label,sigma";
  for (std::size_t i = 0; i < d; ++i) os << ",E" << i + 1;
  for (std::size_t i = 0; i < m; ++i) os << ",raw" << i + 1;
  os << '\n';
  os << std::setprecision(17);
  for (const auto& r : data.rows) {
    os << r.window << ',' << r.scenario_id << ',' << r.label << ',' << r.sigma;
    for (Eigen::Index i = 0; i < r.E.size(); ++i) os << ',' << r.E(i);
    for (Eigen::Index i = 0; i < r.raw.size(); ++i) os << ',' << r.raw(i);
    os << '\n';
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCategory::io, "cannot write " + path);
  write_dataset_csv(os, data);
  if (!os) throw Error(ErrorCategory::io, "write failed: " + path);
}

Dataset read_dataset_csv(std::istream& is) {
  Dataset data;
  std::string line;
  if (!std::getline(is, line) || line != kMagic) throw Error(ErrorCategory::io, "not a gridshs dataset (bad magic line)");
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "seed") data.provenance.seed = std::stoull(value);
      else if (key == "sigmas" && !value.empty()) {
        for (const auto& s : split(value, ';')) data.provenance.sigmas.push_back(parse_double(s));
      } else if (key == "grid_hash") data.provenance.grid_hash = value;
      else if (key == "rows_per_class") data.provenance.rows_per_class = std::stoull(value);
      continue;
    }
    header = split(line, ',');
    break;
  }
  if (header.size() < 5 || header[0] != "window_id") throw Error(ErrorCategory::io, "dataset header missing");
  std::size_t d = 0;
  std::size_t m = 0;
  for (std::size_t i = 4; i < header.size(); ++i) {
    if (header[i].rfind("raw", 0) == 0) ++m;
    else ++d;
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) throw Error(ErrorCategory::io, "dataset row has the wrong number of cells");
    DatasetRow r;
    r.window = parse_int(cells[0]);
    r.scenario_id = parse_int(cells[1]);
    r.label = parse_int(cells[2]);
    r.sigma = parse_double(cells[3]);
    r.E.resize(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) r.E(static_cast<Eigen::Index>(i)) = parse_double(cells[4 + i]);
    r.raw.resize(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) r.raw(static_cast<Eigen::Index>(i)) = parse_double(cells[4 + d + i]);
    data.rows.push_back(std::move(r));
  }
  data.validate();
  return data;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCategory::io, "cannot open " + path);
  return read_dataset_csv(is);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace gridshs::learning
