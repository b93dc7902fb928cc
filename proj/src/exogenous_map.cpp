#include "gridshs/exogenous_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridshs/error.hpp"

namespace gridshs::exogenous {
namespace {

void require_representable(const SignalFault& fault) {
  if (!std::isfinite(fault.gain) || !std::isfinite(fault.offset)) {
    throw Error(ErrorCategory::invalid_input, "fault gain and offset must be finite");
  }
  if (!fault.representable()) {
    throw Error(ErrorCategory::unsupported_fault,
                "offset fault on channel " + std::to_string(fault.channel) +
                    ": the ratio faulted/clean is not constant, so no fixed matrix reproduces it");
  }
}

// One coupled state [x; xhat] and its derivative for either system.
struct Loop {
  Matrix A, B, C, K, G;
  FaultSite site = FaultSite::Input;
  const SignalFault* fault = nullptr;  // null on the switched-model side
  OutputFaultTap tap = OutputFaultTap::Innovation;

  Vector control(const Vector& xhat, double t, const InputSignal& v) const {
    Vector u = K * xhat;
    if (v) u += v(t);
    if (fault && site == FaultSite::Input) {
      u(static_cast<Eigen::Index>(fault->channel)) =
          fault->apply(u(static_cast<Eigen::Index>(fault->channel)));
    }
    return u;
  }

  Vector measure(const Vector& x) const {
    Vector y = C * x;
    if (fault && site == FaultSite::Output) {
      const auto i = static_cast<Eigen::Index>(fault->channel);
      y(i) = fault->apply(y(i));
    }
    return y;
  }

  Vector estimate(const Vector& xhat) const {
    Vector yhat = C * xhat;
    if (fault && site == FaultSite::Output && tap == OutputFaultTap::Innovation) {
      const auto i = static_cast<Eigen::Index>(fault->channel);
      yhat(i) = fault->apply(yhat(i));
    }
    return yhat;
  }

  // xhat' = A xhat + B u + G (yhat - y), i.e. (A + G C) xhat + B u - G y.
  Vector derivative(const Vector& s, double t, const InputSignal& v) const {
    const Eigen::Index n = A.rows();
    const Vector x = s.head(n);
    const Vector xhat = s.tail(n);
    const Vector u = control(xhat, t, v);
    Vector ds(2 * n);
    ds.head(n) = A * x + B * u;
    ds.tail(n) = A * xhat + B * u + G * (estimate(xhat) - measure(x));
    return ds;
  }

  Vector rk4(const Vector& s, double t, double h, const InputSignal& v) const {
    const Vector k1 = derivative(s, t, v);
    const Vector k2 = derivative(s + 0.5 * h * k1, t + 0.5 * h, v);
    const Vector k3 = derivative(s + 0.5 * h * k2, t + 0.5 * h, v);
    const Vector k4 = derivative(s + h * k3, t + h, v);
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
};

}  // namespace

double EquivalenceReport::max_deviation() const {
  return std::max({max_dev_x, max_dev_xhat, max_dev_y});
}

Matrix equivalent_input_fault(const Matrix& B1, const SignalFault& fault) {
  require_representable(fault);
  if (fault.channel >= static_cast<std::size_t>(B1.cols())) {
    throw Error(ErrorCategory::dimension_mismatch, "input fault channel out of range");
  }
  Matrix B2 = B1;
  B2.col(static_cast<Eigen::Index>(fault.channel)) *= fault.gain;
  return B2;
}

Matrix equivalent_output_fault(const Matrix& C1, const SignalFault& fault) {
  require_representable(fault);
  if (fault.channel >= static_cast<std::size_t>(C1.rows())) {
    throw Error(ErrorCategory::dimension_mismatch, "output fault channel out of range");
  }
  Matrix C2 = C1;
  C2.row(static_cast<Eigen::Index>(fault.channel)) *= fault.gain;
  return C2;
}

grid::ScenarioModel equivalent_scenario(const grid::ScenarioModel& nominal, FaultSite site,
                                        const SignalFault& fault) {
  require_representable(fault);
  return site == FaultSite::Input ? grid::apply_control_fault(nominal, fault.channel, fault.gain)
                                  : grid::apply_measurement_fault(nominal, fault.channel, fault.gain);
}

EquivalenceReport verify_equivalence(const grid::ScenarioModel& nominal,
                                     const control::GainSet& gains, FaultSite site,
                                     const SignalFault& fault, const Vector& x0,
                                     const Vector& xhat0, const InputSignal& v,
                                     const EquivalenceOptions& options) {
  const Eigen::Index n = nominal.A.rows();
  if (x0.size() != n || xhat0.size() != n) {
    throw Error(ErrorCategory::dimension_mismatch, "initial states must have n entries");
  }
  if (!(options.step > 0.0) || !(options.horizon > 0.0)) {
    throw Error(ErrorCategory::invalid_input, "step and horizon must be positive");
  }

  SignalFault mapped = fault;
  mapped.offset = 0.0;
  const auto shs_model = equivalent_scenario(nominal, site, mapped);

  Loop actual{nominal.A, nominal.B, nominal.C, gains.K, gains.G, site, &fault, options.tap};
  Loop shs{shs_model.A, shs_model.B, shs_model.C, gains.K, gains.G, site, nullptr, options.tap};

  Vector s_act(2 * n);
  s_act << x0, xhat0;
  Vector s_shs = s_act;

  EquivalenceReport report;
  report.tolerance = options.tolerance;
  report.steps = static_cast<std::size_t>(std::llround(options.horizon / options.step));
  auto record = [&] {
    report.max_dev_x = std::max(report.max_dev_x, (s_act.head(n) - s_shs.head(n)).cwiseAbs().maxCoeff());
    report.max_dev_xhat =
        std::max(report.max_dev_xhat, (s_act.tail(n) - s_shs.tail(n)).cwiseAbs().maxCoeff());
    const Vector dy = actual.measure(s_act.head(n)) - shs.measure(s_shs.head(n));
    if (dy.size() > 0) report.max_dev_y = std::max(report.max_dev_y, dy.cwiseAbs().maxCoeff());
  };
  record();
  for (std::size_t k = 0; k < report.steps; ++k) {
    const double t = static_cast<double>(k) * options.step;
    s_act = actual.rk4(s_act, t, options.step, v);
    s_shs = shs.rk4(s_shs, t, options.step, v);
    record();
  }
  return report;
}

}  // namespace gridshs::exogenous
