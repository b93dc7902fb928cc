#include "gridshs/run_config.hpp"

#include <fstream>
#include <set>

#include "gridshs/error.hpp"

namespace gridshs::pipeline {
namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCategory::invalid_input, where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.contains(it.key())) {
      throw Error(ErrorCategory::invalid_input, "unknown key '" + it.key() + "' in " + where);
    }
  }
}

template <typename T>
T get(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error(ErrorCategory::invalid_input, "missing '" + std::string(key) + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCategory::invalid_input, "bad value for '" + std::string(key) + "' in " + where);
  }
}

template <typename T>
void maybe(const Json& j, const char* key, T& out, const std::string& where) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

Json gains_to_json(const grid::GainRange& g) {
  return Json{{"min", g.min}, {"max", g.max}, {"min_deviation", g.min_deviation}, {"include_loss", g.include_loss}};
}

grid::GainRange gains_from_json(const Json& j, const std::string& where) {
  check_keys(j, {"min", "max", "min_deviation", "include_loss"}, where);
  grid::GainRange g;
  maybe(j, "min", g.min, where);
  maybe(j, "max", g.max, where);
  maybe(j, "min_deviation", g.min_deviation, where);
  maybe(j, "include_loss", g.include_loss, where);
  if (!(g.min >= 0.0) || !(g.max >= g.min)) throw Error(ErrorCategory::invalid_input, where + ": need 0 <= min <= max");
  return g;
}

}  // namespace

RunConfig desk_config() {
  RunConfig c;
  c.grid = grid::make_desk_grid();
  return c;
}

Json complex_list_to_json(const ComplexList& values) {
  Json out = Json::array();
  for (const auto& v : values) out.push_back(Json::array({v.real(), v.imag()}));
  return out;
}

ComplexList complex_list_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCategory::invalid_input, "pole list must be an array");
  ComplexList out;
  for (const auto& v : j) {
    if (v.is_number()) out.emplace_back(v.get<double>(), 0.0);
    else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
      out.emplace_back(v[0].get<double>(), v[1].get<double>());
    } else {
      throw Error(ErrorCategory::invalid_input, "pole must be a number or [re, im]");
    }
  }
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix matrix_from_json(const Json& j) {
  try {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const Json& data = j.at("data");
    if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows) {
      throw Error(ErrorCategory::io, "matrix row count mismatch");
    }
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Json& row = data[static_cast<std::size_t>(r)];
      if (static_cast<Eigen::Index>(row.size()) != cols) throw Error(ErrorCategory::io, "matrix column count mismatch");
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::io, std::string("malformed matrix: ") + e.what());
  }
}

Json to_json(const grid::GridSpec& grid) {
  Json j;
  j["units"] = Json{{"susceptance", "pu"}, {"inertia", "s^2"}, {"damping", "pu"}, {"angle", "rad"}};
  j["buses"] = grid.buses;
  Json lines = Json::array();
  for (const auto& l : grid.lines) {
    lines.push_back(Json{{"from", l.from_bus}, {"to", l.to_bus}, {"susceptance_pu", l.susceptance_pu}});
  }
  j["lines"] = std::move(lines);
  Json gens = Json::array();
  for (const auto& g : grid.generators) {
    gens.push_back(Json{{"bus", g.bus}, {"inertia_s2", g.inertia_s2}, {"damping_pu", g.damping_pu},
                        {"angle0_rad", g.angle0_rad}});
  }
  j["generators"] = std::move(gens);
  Json sensors = Json::array();
  for (const auto& s : grid.sensors) {
    sensors.push_back(Json{{"generator", s.generator},
                           {"state", s.state == grid::SensedState::Angle ? "angle" : "speed"}});
  }
  j["sensors"] = std::move(sensors);
  return j;
}

grid::GridSpec grid_from_json(const Json& j) {
  const std::string where = "grid";
  check_keys(j, {"units", "buses", "lines", "generators", "sensors"}, where);
  if (j.contains("units")) {
    const Json expected{{"susceptance", "pu"}, {"inertia", "s^2"}, {"damping", "pu"}, {"angle", "rad"}};
    check_keys(j.at("units"), {"susceptance", "inertia", "damping", "angle"}, "grid.units");
    for (auto it = j.at("units").begin(); it != j.at("units").end(); ++it) {
      if (*it != expected.at(it.key())) {
        throw Error(ErrorCategory::invalid_input, "grid.units." + it.key() + " must be " +
                                                      expected.at(it.key()).get<std::string>());
      }
    }
  }
  grid::GridSpec grid;
  grid.buses = get<std::vector<int>>(j, "buses", where);
  for (const auto& l : get<Json>(j, "lines", where)) {
    check_keys(l, {"from", "to", "susceptance_pu"}, "grid.lines[]");
    grid.lines.push_back({get<int>(l, "from", "line"), get<int>(l, "to", "line"), get<double>(l, "susceptance_pu", "line")});
  }
  for (const auto& g : get<Json>(j, "generators", where)) {
    check_keys(g, {"bus", "inertia_s2", "damping_pu", "angle0_rad"}, "grid.generators[]");
    grid::Generator gen;
    gen.bus = get<int>(g, "bus", "generator");
    gen.inertia_s2 = get<double>(g, "inertia_s2", "generator");
    gen.damping_pu = get<double>(g, "damping_pu", "generator");
    maybe(g, "angle0_rad", gen.angle0_rad, "generator");
    grid.generators.push_back(gen);
  }
  for (const auto& s : get<Json>(j, "sensors", where)) {
    check_keys(s, {"generator", "state"}, "grid.sensors[]");
    grid::Sensor sensor;
    sensor.generator = get<std::size_t>(s, "generator", "sensor");
    const auto state = get<std::string>(s, "state", "sensor");
    if (state == "angle") sensor.state = grid::SensedState::Angle;
    else if (state == "speed") sensor.state = grid::SensedState::Speed;
    else throw Error(ErrorCategory::invalid_input, "sensor state must be 'angle' or 'speed'");
    grid.sensors.push_back(sensor);
  }
  grid.validate();
  return grid;
}

Json to_json(const RunConfig& c) {
  Json j;
  j["format"] = "gridshs-config";
  j["version"] = 1;
  j["seed"] = c.seed;
  j["grid"] = to_json(c.grid);
  const auto& e = c.enumeration;
  j["enumeration"] = Json{{"physical", e.physical},
                          {"physical_n2", e.physical_n2},
                          {"control", e.control},
                          {"measurement", e.measurement},
                          {"control_gains", gains_to_json(e.control_gains)},
                          {"measurement_gains", gains_to_json(e.measurement_gains)},
                          {"min_outage_effect", e.min_outage_effect},
                          {"seed", e.seed}};
  Json control{{"placement_seed", c.control.placement.seed},
               {"placement_draws", c.control.placement.draws},
               {"placement_sweeps", c.control.placement.sweeps},
               {"sigma_pu", c.control.sigma}};
  if (!c.control.feedback_poles.empty()) control["feedback_poles"] = complex_list_to_json(c.control.feedback_poles);
  if (!c.control.observer_poles.empty()) control["observer_poles"] = complex_list_to_json(c.control.observer_poles);
  j["control"] = std::move(control);
  const auto& s = c.simulation;
  j["simulation"] = Json{{"sample_period_s", s.sample_period},
                         {"window_s", s.window},
                         {"interval_s", s.interval},
                         {"kick_pu", s.kick}};
  j["dataset"] = Json{{"rows_per_class", c.dataset.rows_per_class},
                      {"sigmas_pu", c.dataset.sigmas},
                      {"include_raw", c.dataset.include_raw}};
  Json knn = Json::array();
  for (const auto& p : c.learning.knn_grid) knn.push_back(Json{{"k", p.k}, {"p", p.p}});
  Json svm = Json::array();
  for (const auto& p : c.learning.svm_grid) svm.push_back(Json{{"C", p.C}, {"gamma", p.gamma}});
  j["learning"] = Json{{"folds", c.learning.folds}, {"calibrate", c.learning.calibrate},
                       {"knn_grid", std::move(knn)}, {"svm_grid", std::move(svm)}};
  return j;
}

RunConfig config_from_json(const Json& j) {
  check_keys(j, {"format", "version", "seed", "grid", "enumeration", "control", "simulation", "dataset", "learning"},
             "config");
  if (j.contains("format") && j.at("format") != "gridshs-config") {
    throw Error(ErrorCategory::invalid_input, "config format must be 'gridshs-config'");
  }
  if (j.contains("version") && j.at("version") != 1) {
    throw Error(ErrorCategory::invalid_input, "unsupported config version");
  }
  RunConfig c;
  maybe(j, "seed", c.seed, "config");
  c.grid = grid_from_json(get<Json>(j, "grid", "config"));
  if (j.contains("enumeration")) {
    const Json& e = j.at("enumeration");
    const std::string w = "enumeration";
    check_keys(e, {"physical", "physical_n2", "control", "measurement", "control_gains", "measurement_gains",
                   "min_outage_effect", "seed"},
               w);
    auto& p = c.enumeration;
    maybe(e, "physical", p.physical, w);
    maybe(e, "physical_n2", p.physical_n2, w);
    maybe(e, "control", p.control, w);
    maybe(e, "measurement", p.measurement, w);
    if (e.contains("control_gains")) p.control_gains = gains_from_json(e.at("control_gains"), w + ".control_gains");
    if (e.contains("measurement_gains")) {
      p.measurement_gains = gains_from_json(e.at("measurement_gains"), w + ".measurement_gains");
    }
    maybe(e, "min_outage_effect", p.min_outage_effect, w);
    maybe(e, "seed", p.seed, w);
  }
  if (j.contains("control")) {
    const Json& k = j.at("control");
    const std::string w = "control";
    check_keys(k, {"placement_seed", "placement_draws", "placement_sweeps", "sigma_pu", "feedback_poles",
                   "observer_poles"},
               w);
    maybe(k, "placement_seed", c.control.placement.seed, w);
    maybe(k, "placement_draws", c.control.placement.draws, w);
    maybe(k, "placement_sweeps", c.control.placement.sweeps, w);
    maybe(k, "sigma_pu", c.control.sigma, w);
    if (k.contains("feedback_poles")) c.control.feedback_poles = complex_list_from_json(k.at("feedback_poles"));
    if (k.contains("observer_poles")) c.control.observer_poles = complex_list_from_json(k.at("observer_poles"));
  }
  if (j.contains("simulation")) {
    const Json& s = j.at("simulation");
    const std::string w = "simulation";
    check_keys(s, {"sample_period_s", "window_s", "interval_s", "kick_pu"}, w);
    maybe(s, "sample_period_s", c.simulation.sample_period, w);
    maybe(s, "window_s", c.simulation.window, w);
    maybe(s, "interval_s", c.simulation.interval, w);
    maybe(s, "kick_pu", c.simulation.kick, w);
    c.simulation.validate();
  }
  if (j.contains("dataset")) {
    const Json& d = j.at("dataset");
    const std::string w = "dataset";
    check_keys(d, {"rows_per_class", "sigmas_pu", "include_raw"}, w);
    maybe(d, "rows_per_class", c.dataset.rows_per_class, w);
    maybe(d, "sigmas_pu", c.dataset.sigmas, w);
    maybe(d, "include_raw", c.dataset.include_raw, w);
  }
  if (j.contains("learning")) {
    const Json& l = j.at("learning");
    const std::string w = "learning";
    check_keys(l, {"folds", "calibrate", "knn_grid", "svm_grid"}, w);
    maybe(l, "folds", c.learning.folds, w);
    maybe(l, "calibrate", c.learning.calibrate, w);
    if (l.contains("knn_grid")) {
      c.learning.knn_grid.clear();
      for (const auto& p : l.at("knn_grid")) {
        check_keys(p, {"k", "p"}, "learning.knn_grid[]");
        c.learning.knn_grid.push_back({get<int>(p, "k", w), p.contains("p") ? get<double>(p, "p", w) : 2.0});
      }
    }
    if (l.contains("svm_grid")) {
      c.learning.svm_grid.clear();
      for (const auto& p : l.at("svm_grid")) {
        check_keys(p, {"C", "gamma"}, "learning.svm_grid[]");
        c.learning.svm_grid.push_back({get<double>(p, "C", w), get<double>(p, "gamma", w)});
      }
    }
  }
  return c;
}

RunConfig load_config(const std::string& path_or_name) {
  if (path_or_name == "desk") return desk_config();
  return config_from_json(read_json_file(path_or_name));
}

Json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCategory::io, "cannot open " + path);
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::io, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCategory::io, "cannot write " + path);
  os << j.dump(2) << '\n';
  if (!os) throw Error(ErrorCategory::io, "write failed: " + path);
}

}  // namespace gridshs::pipeline
