#include "gridshs/sim_engine.hpp"

#include <cmath>
#include <random>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "gridshs/error.hpp"
#include "gridshs/seed.hpp"

namespace gridshs::sim {
namespace {

constexpr double kDivergenceLimit = 1e9;

std::size_t steps_for(double span, double sample_period) {
  return static_cast<std::size_t>(std::llround(span / sample_period));
}

}  // namespace

void SimConfig::validate() const {
  if (!(sample_period > 0.0)) throw Error(ErrorCategory::invalid_input, "sample period must be > 0");
  if (!(window >= sample_period)) throw Error(ErrorCategory::invalid_input, "window must be >= sample period");
  if (!(interval >= window)) throw Error(ErrorCategory::invalid_input, "switching interval must be >= window");
  if (!(kick >= 0.0)) throw Error(ErrorCategory::invalid_input, "kick magnitude must be >= 0");
  if (samples_per_window() < 1) throw Error(ErrorCategory::invalid_input, "window holds no samples");
}

std::size_t SimConfig::samples_per_window() const { return steps_for(window, sample_period); }

std::size_t SimConfig::samples_per_interval() const { return steps_for(interval, sample_period); }

Discretized discretize(const Matrix& A, const Matrix& B, double sample_period) {
  if (!(sample_period > 0.0)) throw Error(ErrorCategory::invalid_input, "sample period must be > 0");
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  if (A.cols() != n || B.rows() != n) {
    throw Error(ErrorCategory::dimension_mismatch, "discretize: A must be n x n and B n x m");
  }
  Matrix M = Matrix::Zero(n + m, n + m);
  M.topLeftCorner(n, n) = A * sample_period;
  M.topRightCorner(n, m) = B * sample_period;
  const Matrix phi = M.exp();
  Discretized out{phi.topLeftCorner(n, n), phi.topRightCorner(n, m)};
  if (!out.Ad.allFinite() || !out.Bd.allFinite()) {
    throw Error(ErrorCategory::numerical, "discretization produced non-finite entries");
  }
  return out;
}

DiscreteClosedLoop prepare(const control::ClosedLoopModel& model, double sample_period) {
  return {model, discretize(model.A_cl, model.B_cl, sample_period), sample_period};
}

WindowResult simulate_window(const DiscreteClosedLoop& dm, const Vector& z0, const Matrix& v,
                             const SimConfig& cfg, std::uint64_t seed, std::size_t steps) {
  cfg.validate();
  const auto& model = dm.model;
  const auto n2 = static_cast<Eigen::Index>(2 * model.states);
  const auto q = static_cast<Eigen::Index>(model.inputs);
  const auto r = static_cast<Eigen::Index>(model.outputs);
  const std::size_t n0 = cfg.samples_per_window();
  if (std::abs(dm.sample_period - cfg.sample_period) > 1e-15) {
    throw Error(ErrorCategory::invalid_input, "model was discretized with a different sample period");
  }
  if (z0.size() != n2 || !z0.allFinite()) {
    throw Error(ErrorCategory::invalid_input, "initial state must be finite with 2n entries");
  }
  if (v.size() != 0 && (v.cols() != q || static_cast<std::size_t>(v.rows()) < n0)) {
    throw Error(ErrorCategory::dimension_mismatch, "input trace must be N0 x q");
  }
  const std::size_t total = std::max(steps, n0);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const Matrix Bv = dm.zoh.Bd.leftCols(q);

  WindowResult out;
  out.trace.scenario_id = model.scenario_id;
  out.trace.samples.resize(static_cast<Eigen::Index>(n0), static_cast<Eigen::Index>(model.output_width()));
  Vector z = z0;
  for (std::size_t l = 0; l < total; ++l) {
    if (l < n0) {
      Vector yc = model.C_cl * z;
      if (model.sigma > 0.0) {
        for (Eigen::Index i = 0; i < r; ++i) yc(i) += model.sigma * noise(rng);
      }
      out.trace.samples.row(static_cast<Eigen::Index>(l)) = yc.transpose();
    }
    Vector next = dm.zoh.Ad * z;
    if (v.size() != 0 && l < static_cast<std::size_t>(v.rows())) {
      next.noalias() += Bv * v.row(static_cast<Eigen::Index>(l)).transpose();
    }
    z = std::move(next);
    if (!(z.cwiseAbs().maxCoeff() <= kDivergenceLimit)) {
      throw Error(ErrorCategory::numerical,
                  "scenario " + std::to_string(model.scenario_id) + " diverged at step " +
                      std::to_string(l + 1) + " (|state| > 1e9)");
    }
  }
  out.terminal_state = z;
  return out;
}

WindowResult simulate_window(const control::ClosedLoopModel& model, const Vector& z0,
                             const Matrix& v, const SimConfig& cfg, std::uint64_t seed) {
  return simulate_window(prepare(model, cfg.sample_period), z0, v, cfg, seed);
}

OutputTrace nominal_reference(const DiscreteClosedLoop& nominal, const Vector& z0,
                              const Matrix& v, const SimConfig& cfg) {
  DiscreteClosedLoop quiet = nominal;
  quiet.model.sigma = 0.0;
  return simulate_window(quiet, z0, v, cfg, 0).trace;
}

Vector excitation_kick(std::size_t augmented_states, const SimConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-cfg.kick, cfg.kick);
  Vector z(static_cast<Eigen::Index>(augmented_states));
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = dist(rng);
  return z;
}

std::vector<DiscreteClosedLoop> prepare_bank(const grid::ScenarioRegistry& registry,
                                             const control::GainSet& gains, double sigma,
                                             double sample_period) {
  std::vector<DiscreteClosedLoop> bank;
  bank.reserve(registry.size());
  for (const auto& s : registry.scenarios) {
    bank.push_back(prepare(control::build_closed_loop(s, gains, sigma), sample_period));
  }
  return bank;
}

std::vector<ScheduledWindow> simulate_schedule(const grid::ScenarioRegistry& registry,
                                               const control::GainSet& gains,
                                               const Schedule& schedule, const SimConfig& cfg,
                                               double sigma, std::uint64_t seed) {
  cfg.validate();
  for (const auto& iv : schedule.intervals) {
    registry.at(iv.scenario_id);
    if (!(iv.duration >= cfg.window)) {
      throw Error(ErrorCategory::invalid_input, "interval shorter than the observation window");
    }
  }
  const auto bank = prepare_bank(registry, gains, sigma, cfg.sample_period);
  const std::size_t n2 = 2 * registry.nominal().state_count();

  std::vector<ScheduledWindow> out;
  out.reserve(schedule.intervals.size());
  Vector state = Vector::Zero(static_cast<Eigen::Index>(n2));
  for (std::size_t i = 0; i < schedule.intervals.size(); ++i) {
    const auto& iv = schedule.intervals[i];
    const Vector z0 = state + excitation_kick(n2, cfg, child_seed(seed, SeedStream::schedule_kick, i));
    const std::size_t steps = steps_for(iv.duration, cfg.sample_period);
    auto run = simulate_window(bank[static_cast<std::size_t>(iv.scenario_id)], z0, Matrix(), cfg,
                               child_seed(seed, SeedStream::schedule_noise, i), steps);
    ScheduledWindow w;
    w.monitored = std::move(run.trace);
    w.monitored.window = iv.k;
    w.nominal = nominal_reference(bank.front(), z0, Matrix(), cfg);
    w.nominal.window = iv.k;
    w.scenario_id = iv.scenario_id;
    w.truth = registry.at(iv.scenario_id).cls;
    state = std::move(run.terminal_state);
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace gridshs::sim
