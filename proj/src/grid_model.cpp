#include "gridshs/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/LU>

#include "gridshs/error.hpp"
#include "gridshs/seed.hpp"

namespace gridshs {

std::string_view to_string(ScenarioClass c) {
  switch (c) {
    case ScenarioClass::Normal: return "normal";
    case ScenarioClass::Physical: return "physical";
    case ScenarioClass::Control: return "control";
    case ScenarioClass::Measurement: return "measurement";
  }
  return "unknown";
}

std::optional<ScenarioClass> parse_scenario_class(std::string_view name) {
  for (int i = 0; i < kClassCount; ++i) {
    const auto c = static_cast<ScenarioClass>(i);
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

ScenarioClass class_from_label(int label) {
  if (label < 0 || label >= kClassCount) {
    throw Error(ErrorCategory::invalid_input, "class label out of range: " + std::to_string(label));
  }
  return static_cast<ScenarioClass>(label);
}

}  // namespace gridshs

namespace gridshs::grid {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

std::map<int, std::size_t> bus_index(const GridSpec& grid) {
  std::map<int, std::size_t> index;
  for (std::size_t i = 0; i < grid.buses.size(); ++i) index.emplace(grid.buses[i], i);
  return index;
}

std::string format_gain(double g) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << g;
  return os.str();
}

Matrix swing_state_matrix(const GridSpec& grid, const Matrix& laplacian) {
  const std::size_t g = grid.generators.size();
  Matrix A = Matrix::Zero(2 * g, 2 * g);
  for (std::size_t i = 0; i < g; ++i) {
    const auto& gi = grid.generators[i];
    const auto di = static_cast<Eigen::Index>(2 * i);
    const auto wi = di + 1;
    A(di, wi) = 1.0;
    A(wi, wi) = -gi.damping_pu / gi.inertia_s2;
    double self = 0.0;
    for (std::size_t j = 0; j < g; ++j) {
      if (j == i) continue;
      const double b = -laplacian(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (b == 0.0) continue;
      const double k = b * std::cos(gi.angle0_rad - grid.generators[j].angle0_rad);
      A(wi, static_cast<Eigen::Index>(2 * j)) = k / gi.inertia_s2;
      self += k;
    }
    A(wi, di) = -self / gi.inertia_s2;
  }
  return A;
}

Matrix input_matrix(const GridSpec& grid) {
  const std::size_t g = grid.generators.size();
  Matrix B = Matrix::Zero(2 * g, g);
  for (std::size_t i = 0; i < g; ++i) {
    B(static_cast<Eigen::Index>(2 * i + 1), static_cast<Eigen::Index>(i)) =
        1.0 / grid.generators[i].inertia_s2;
  }
  return B;
}

Matrix output_matrix(const GridSpec& grid) {
  const std::size_t g = grid.generators.size();
  Matrix C = Matrix::Zero(static_cast<Eigen::Index>(grid.sensors.size()), 2 * g);
  for (std::size_t s = 0; s < grid.sensors.size(); ++s) {
    const auto& sensor = grid.sensors[s];
    const std::size_t col = 2 * sensor.generator + (sensor.state == SensedState::Speed ? 1 : 0);
    C(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(col)) = 1.0;
  }
  return C;
}

std::vector<bool> active_mask(const GridSpec& grid, const std::set<std::size_t>& out_lines) {
  std::vector<bool> active(grid.lines.size(), true);
  for (const std::size_t l : out_lines) {
    if (l >= grid.lines.size()) {
      throw Error(ErrorCategory::invalid_input, "line index " + std::to_string(l) + " out of range");
    }
    active[l] = false;
  }
  return active;
}

std::string line_label(const GridSpec& grid, std::size_t l) {
  return std::to_string(grid.lines[l].from_bus) + "-" + std::to_string(grid.lines[l].to_bus);
}

double draw_gain(std::mt19937_64& rng, const GainRange& range) {
  std::uniform_real_distribution<double> dist(range.min, range.max);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double g = std::round(dist(rng) * 1000.0) / 1000.0;
    if (std::abs(g - 1.0) >= range.min_deviation) return g;
  }
  throw Error(ErrorCategory::invalid_input, "gain range leaves no value away from 1");
}

}  // namespace

void GridSpec::validate() const {
  if (buses.empty()) throw Error(ErrorCategory::invalid_input, "grid has no buses");
  if (generators.empty()) throw Error(ErrorCategory::invalid_input, "grid has no generators");
  const auto index = bus_index(*this);
  if (index.size() != buses.size()) throw Error(ErrorCategory::invalid_input, "duplicate bus id");
  for (const auto& line : lines) {
    if (!index.contains(line.from_bus) || !index.contains(line.to_bus)) {
      throw Error(ErrorCategory::invalid_input, "line references unknown bus");
    }
    if (line.from_bus == line.to_bus) throw Error(ErrorCategory::invalid_input, "self-loop line");
    if (!(line.susceptance_pu > 0.0) || !std::isfinite(line.susceptance_pu)) {
      throw Error(ErrorCategory::invalid_input, "line susceptance must be positive");
    }
  }
  std::set<int> gen_buses;
  for (const auto& gen : generators) {
    if (!index.contains(gen.bus)) {
      throw Error(ErrorCategory::invalid_input, "generator on unknown bus " + std::to_string(gen.bus));
    }
    if (!gen_buses.insert(gen.bus).second) {
      throw Error(ErrorCategory::invalid_input, "two generators on bus " + std::to_string(gen.bus));
    }
    if (!(gen.inertia_s2 > 0.0) || !std::isfinite(gen.inertia_s2)) {
      throw Error(ErrorCategory::invalid_input, "generator inertia must be positive");
    }
    if (gen.damping_pu < 0.0 || !std::isfinite(gen.damping_pu) || !std::isfinite(gen.angle0_rad)) {
      throw Error(ErrorCategory::invalid_input, "generator damping/angle invalid");
    }
  }
  for (const auto& sensor : sensors) {
    if (sensor.generator >= generators.size()) {
      throw Error(ErrorCategory::invalid_input, "sensor references unknown generator");
    }
  }
  DisjointSets sets(buses.size());
  for (const auto& line : lines) sets.unite(index.at(line.from_bus), index.at(line.to_bus));
  for (std::size_t i = 1; i < buses.size(); ++i) {
    if (sets.find(i) != sets.find(0)) {
      throw Error(ErrorCategory::invalid_input, "line graph is not connected");
    }
  }
}

const ScenarioModel& ScenarioRegistry::at(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= scenarios.size()) {
    throw Error(ErrorCategory::invalid_input, "unknown scenario id " + std::to_string(id));
  }
  return scenarios[static_cast<std::size_t>(id)];
}

std::size_t ScenarioRegistry::count(ScenarioClass c) const {
  return static_cast<std::size_t>(
      std::count_if(scenarios.begin(), scenarios.end(), [c](const auto& s) { return s.cls == c; }));
}

std::vector<int> ScenarioRegistry::ids_of(ScenarioClass c, bool include_islanded) const {
  std::vector<int> ids;
  for (const auto& s : scenarios) {
    if (s.cls == c && (include_islanded || !s.islanded)) ids.push_back(s.id);
  }
  return ids;
}

void ScenarioRegistry::validate() const {
  if (scenarios.empty() || scenarios.front().cls != ScenarioClass::Normal) {
    throw Error(ErrorCategory::invalid_input, "registry must start with the Normal scenario");
  }
  const auto& ref = scenarios.front();
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto& s = scenarios[i];
    if (s.id != static_cast<int>(i)) throw Error(ErrorCategory::invalid_input, "registry ids not contiguous");
    if (i > 0 && s.cls == ScenarioClass::Normal) {
      throw Error(ErrorCategory::invalid_input, "only id 0 may be Normal");
    }
    if (s.A.rows() != ref.A.rows() || s.A.cols() != ref.A.cols() || s.B.rows() != ref.B.rows() ||
        s.B.cols() != ref.B.cols() || s.C.rows() != ref.C.rows() || s.C.cols() != ref.C.cols()) {
      throw Error(ErrorCategory::dimension_mismatch,
                  "scenario " + std::to_string(s.id) + " dimensions differ from nominal");
    }
  }
}

ReducedNetwork reduce_network(const GridSpec& grid, const std::vector<bool>& active) {
  const auto index = bus_index(grid);
  const std::size_t nb = grid.buses.size();

  DisjointSets sets(nb);
  for (std::size_t l = 0; l < grid.lines.size(); ++l) {
    if (active[l]) sets.unite(index.at(grid.lines[l].from_bus), index.at(grid.lines[l].to_bus));
  }
  ReducedNetwork out;
  std::set<std::size_t> roots;
  for (std::size_t i = 0; i < nb; ++i) roots.insert(sets.find(i));
  out.islanded = roots.size() > 1;

  std::set<std::size_t> live_roots;
  std::vector<bool> is_gen(nb, false);
  for (const auto& gen : grid.generators) {
    is_gen[index.at(gen.bus)] = true;
    live_roots.insert(sets.find(index.at(gen.bus)));
  }

  // Generators first (in generator order), then live load buses.
  std::vector<std::size_t> order;
  for (const auto& gen : grid.generators) order.push_back(index.at(gen.bus));
  for (std::size_t i = 0; i < nb; ++i) {
    if (!is_gen[i] && live_roots.contains(sets.find(i))) order.push_back(i);
  }
  std::vector<long> position(nb, -1);
  for (std::size_t k = 0; k < order.size(); ++k) position[order[k]] = static_cast<long>(k);

  const auto m = static_cast<Eigen::Index>(order.size());
  Matrix L = Matrix::Zero(m, m);
  for (std::size_t l = 0; l < grid.lines.size(); ++l) {
    if (!active[l]) continue;
    const long a = position[index.at(grid.lines[l].from_bus)];
    const long b = position[index.at(grid.lines[l].to_bus)];
    if (a < 0 || b < 0) continue;
    const double s = grid.lines[l].susceptance_pu;
    L(a, a) += s;
    L(b, b) += s;
    L(a, b) -= s;
    L(b, a) -= s;
  }

  const auto g = static_cast<Eigen::Index>(grid.generators.size());
  const Eigen::Index loads = m - g;
  if (loads == 0) {
    out.laplacian = L;
    return out;
  }
  const Eigen::FullPivLU<Matrix> lu(L.bottomRightCorner(loads, loads));
  if (!lu.isInvertible()) {
    throw Error(ErrorCategory::numerical, "singular reduced network: no unique operating point");
  }
  out.laplacian = L.topLeftCorner(g, g) -
                  L.topRightCorner(g, loads) * lu.solve(L.bottomLeftCorner(loads, g));
  // Symmetrize away elimination round-off.
  out.laplacian = 0.5 * (out.laplacian + out.laplacian.transpose()).eval();
  return out;
}

ScenarioModel build_nominal_model(const GridSpec& grid) {
  grid.validate();
  const auto reduced = reduce_network(grid, std::vector<bool>(grid.lines.size(), true));
  ScenarioModel model;
  model.id = 0;
  model.cls = ScenarioClass::Normal;
  model.A = swing_state_matrix(grid, reduced.laplacian);
  model.B = input_matrix(grid);
  model.C = output_matrix(grid);
  model.description = "nominal";
  return model;
}

ScenarioModel apply_line_outage(const GridSpec& grid, const std::set<std::size_t>& out_lines) {
  grid.validate();
  const auto reduced = reduce_network(grid, active_mask(grid, out_lines));
  ScenarioModel model;
  model.cls = out_lines.empty() ? ScenarioClass::Normal : ScenarioClass::Physical;
  model.A = swing_state_matrix(grid, reduced.laplacian);
  model.B = input_matrix(grid);
  model.C = output_matrix(grid);
  model.islanded = reduced.islanded;
  std::string desc;
  for (const std::size_t l : out_lines) {
    if (!desc.empty()) desc += ",";
    desc += line_label(grid, l);
  }
  model.description = out_lines.empty() ? "nominal" : "line " + desc + " out";
  if (model.islanded) model.description += " (islanded)";
  return model;
}

ScenarioModel apply_control_fault(const ScenarioModel& nominal, std::size_t input_index,
                                  double gain) {
  if (input_index >= nominal.input_count()) {
    throw Error(ErrorCategory::invalid_input, "input index " + std::to_string(input_index) + " out of range");
  }
  if (!(gain >= 0.0) || !std::isfinite(gain)) {
    throw Error(ErrorCategory::invalid_input, "control fault gain must be finite and >= 0");
  }
  ScenarioModel model = nominal;
  model.cls = ScenarioClass::Control;
  model.B.col(static_cast<Eigen::Index>(input_index)) *= gain;
  model.description = "u" + std::to_string(input_index + 1) + " gain " + format_gain(gain);
  return model;
}

ScenarioModel apply_measurement_fault(const ScenarioModel& nominal, std::size_t output_index,
                                      double gain) {
  if (output_index >= nominal.output_count()) {
    throw Error(ErrorCategory::invalid_input, "output index " + std::to_string(output_index) + " out of range");
  }
  if (!(gain >= 0.0) || !std::isfinite(gain)) {
    throw Error(ErrorCategory::invalid_input, "measurement fault gain must be finite and >= 0");
  }
  ScenarioModel model = nominal;
  model.cls = ScenarioClass::Measurement;
  model.C.row(static_cast<Eigen::Index>(output_index)) *= gain;
  model.description = "y" + std::to_string(output_index + 1) + " gain " + format_gain(gain);
  return model;
}

double outage_effect(const GridSpec& grid, const std::set<std::size_t>& out_lines) {
  const auto base = reduce_network(grid, std::vector<bool>(grid.lines.size(), true));
  const auto cut = reduce_network(grid, active_mask(grid, out_lines));
  return (cut.laplacian - base.laplacian).norm() / base.laplacian.norm();
}

ScenarioRegistry enumerate_scenarios(const GridSpec& grid, const EnumerationPlan& plan) {
  grid.validate();
  if (plan.physical_n2 > plan.physical) {
    throw Error(ErrorCategory::invalid_input, "physical_n2 exceeds physical count");
  }
  std::mt19937_64 rng(child_seed(plan.seed, SeedStream::enumeration));

  ScenarioRegistry registry;
  ScenarioModel nominal = build_nominal_model(grid);
  registry.scenarios.push_back(nominal);

  const std::size_t n1 = plan.physical - plan.physical_n2;
  if (n1 > grid.lines.size()) {
    throw Error(ErrorCategory::invalid_input, "requested " + std::to_string(n1) +
                                                  " N-1 outages but the grid has " +
                                                  std::to_string(grid.lines.size()) + " lines");
  }

  auto usable = [&](const std::set<std::size_t>& cut) {
    if (reduce_network(grid, active_mask(grid, cut)).islanded) return false;
    return outage_effect(grid, cut) >= plan.min_outage_effect;
  };

  std::vector<std::set<std::size_t>> outages;
  if (plan.physical > 0) {
    std::vector<std::size_t> singles;
    for (std::size_t l = 0; l < grid.lines.size(); ++l) {
      if (usable({l})) singles.push_back(l);
    }
    if (n1 > singles.size()) {
      throw Error(ErrorCategory::invalid_input,
                  "requested " + std::to_string(n1) + " N-1 outages but only " +
                      std::to_string(singles.size()) + " lines qualify");
    }
    std::shuffle(singles.begin(), singles.end(), rng);
    singles.resize(n1);
    std::sort(singles.begin(), singles.end());
    for (const auto l : singles) outages.push_back({l});

    if (plan.physical_n2 > 0) {
      std::vector<std::set<std::size_t>> pairs;
      for (std::size_t a = 0; a < grid.lines.size(); ++a) {
        for (std::size_t b = a + 1; b < grid.lines.size(); ++b) {
          if (usable({a, b})) pairs.push_back({a, b});
        }
      }
      if (plan.physical_n2 > pairs.size()) {
        throw Error(ErrorCategory::invalid_input, "not enough qualifying N-2 outages");
      }
      std::shuffle(pairs.begin(), pairs.end(), rng);
      pairs.resize(plan.physical_n2);
      std::sort(pairs.begin(), pairs.end());
      for (auto& p : pairs) outages.push_back(std::move(p));
    }
  }
  for (const auto& cut : outages) {
    ScenarioModel s = apply_line_outage(grid, cut);
    s.id = static_cast<int>(registry.scenarios.size());
    registry.scenarios.push_back(std::move(s));
  }

  auto add_channel_faults = [&](std::size_t count, std::size_t channels, const GainRange& range,
                                bool control) {
    for (std::size_t j = 0; j < count; ++j) {
      const std::size_t channel = j % channels;
      const double gain = (range.include_loss && j < channels) ? 0.0 : draw_gain(rng, range);
      ScenarioModel s = control ? apply_control_fault(nominal, channel, gain)
                                : apply_measurement_fault(nominal, channel, gain);
      s.id = static_cast<int>(registry.scenarios.size());
      registry.scenarios.push_back(std::move(s));
    }
  };
  if (plan.control > 0) add_channel_faults(plan.control, nominal.input_count(), plan.control_gains, true);
  if (plan.measurement > 0) {
    if (nominal.output_count() == 0) throw Error(ErrorCategory::invalid_input, "grid has no sensors");
    add_channel_faults(plan.measurement, nominal.output_count(), plan.measurement_gains, false);
  }
  registry.validate();
  return registry;
}

GridSpec make_desk_grid(std::uint64_t seed) {
  // from, to, series reactance (p.u.) of the standard 30-bus case.
  struct Branch {
    int from;
    int to;
    double x;
  };
  static constexpr Branch kBranches[] = {
      {1, 2, 0.0575},   {1, 3, 0.1652},   {2, 4, 0.1737},   {3, 4, 0.0379},   {2, 5, 0.1983},
      {2, 6, 0.1763},   {4, 6, 0.0414},   {5, 7, 0.1160},   {6, 7, 0.0820},   {6, 8, 0.0420},
      {6, 9, 0.2080},   {6, 10, 0.5560},  {9, 11, 0.2080},  {9, 10, 0.1100},  {4, 12, 0.2560},
      {12, 13, 0.1400}, {12, 14, 0.2559}, {12, 15, 0.1304}, {12, 16, 0.1987}, {14, 15, 0.1997},
      {16, 17, 0.1923}, {15, 18, 0.2185}, {18, 19, 0.1292}, {19, 20, 0.0680}, {10, 20, 0.2090},
      {10, 17, 0.0845}, {10, 21, 0.0749}, {10, 22, 0.1499}, {21, 22, 0.0236}, {15, 23, 0.2020},
      {22, 24, 0.1790}, {23, 24, 0.2700}, {24, 25, 0.3292}, {25, 26, 0.3800}, {25, 27, 0.2087},
      {28, 27, 0.3960}, {27, 29, 0.4153}, {27, 30, 0.6027}, {29, 30, 0.4533}, {8, 28, 0.2000},
      {6, 28, 0.0599},
  };
  GridSpec grid;
  for (int b = 1; b <= 30; ++b) grid.buses.push_back(b);
  for (const auto& br : kBranches) grid.lines.push_back({br.from, br.to, 1.0 / br.x});

  std::mt19937_64 rng(child_seed(seed, SeedStream::desk_grid));
  std::uniform_real_distribution<double> inertia(2.0, 6.0);
  std::uniform_real_distribution<double> damping(0.05, 0.3);
  std::uniform_real_distribution<double> angle(-0.2, 0.2);
  auto round4 = [](double v) { return std::round(v * 1e4) / 1e4; };
  bool first = true;
  for (const int bus : {1, 2, 5, 8, 11}) {
    Generator gen;
    gen.bus = bus;
    gen.inertia_s2 = round4(inertia(rng));
    gen.damping_pu = round4(damping(rng));
    gen.angle0_rad = first ? 0.0 : round4(angle(rng));
    first = false;
    grid.generators.push_back(gen);
  }
  for (std::size_t i = 0; i < grid.generators.size(); ++i) grid.sensors.push_back({i, SensedState::Angle});
  grid.validate();
  return grid;
}

}  // namespace gridshs::grid
