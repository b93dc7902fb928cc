#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gridshs/error.hpp"
#include "gridshs/exogenous_map.hpp"
#include "support.hpp"

using namespace gridshs;
using namespace gridshs::exogenous;

namespace {

Vector uniform_vector(Eigen::Index n, std::mt19937_64& rng, double half_width) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

}  // namespace

TEST(ExogenousMap, LossZeroesOneColumnOrRow) {
  const auto& nom = fixture::desk_bank().registry.nominal();
  const Matrix B2 = equivalent_input_fault(nom.B, SignalFault::loss(2));
  EXPECT_TRUE(B2.col(2).isZero(0.0));
  Matrix rest = B2;
  rest.col(2) = nom.B.col(2);
  EXPECT_EQ(rest, nom.B);

  const Matrix C2 = equivalent_output_fault(nom.C, SignalFault::loss(4));
  EXPECT_TRUE(C2.row(4).isZero(0.0));
  Matrix rest_c = C2;
  rest_c.row(4) = nom.C.row(4);
  EXPECT_EQ(rest_c, nom.C);
}

TEST(ExogenousMap, GainScalesAndUnitGainIsIdentity) {
  const auto& nom = fixture::desk_bank().registry.nominal();
  EXPECT_EQ(equivalent_input_fault(nom.B, SignalFault::scale(0, 1.0)), nom.B);
  EXPECT_EQ(equivalent_output_fault(nom.C, SignalFault::scale(3, 1.0)), nom.C);
  EXPECT_TRUE(equivalent_input_fault(nom.B, SignalFault::scale(1, 1.2)).col(1).isApprox(1.2 * nom.B.col(1)));
  EXPECT_TRUE(equivalent_output_fault(nom.C, SignalFault::scale(1, 1.1)).row(1).isApprox(1.1 * nom.C.row(1)));
}

TEST(ExogenousMap, OffsetAndOutOfRangeFaultsAreRejected) {
  const auto& nom = fixture::desk_bank().registry.nominal();
  try {
    equivalent_input_fault(nom.B, SignalFault{0, 1.0, 0.2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::unsupported_fault);
  }
  try {
    equivalent_output_fault(nom.C, SignalFault::loss(5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::dimension_mismatch);
  }
}

TEST(ExogenousMap, MappedScenarioLandsInTheRightClass) {
  const auto& nom = fixture::desk_bank().registry.nominal();
  const auto c = equivalent_scenario(nom, FaultSite::Input, SignalFault::scale(1, 0.7));
  EXPECT_EQ(c.cls, ScenarioClass::Control);
  EXPECT_EQ(c.A, nom.A);
  EXPECT_EQ(c.C, nom.C);
  const auto m = equivalent_scenario(nom, FaultSite::Output, SignalFault::loss(0));
  EXPECT_EQ(m.cls, ScenarioClass::Measurement);
  EXPECT_EQ(m.A, nom.A);
  EXPECT_EQ(m.B, nom.B);
}

TEST(ExogenousMap, FaultedSignalsMatchSwitchedModel) {
  const auto& bank = fixture::desk_bank();
  const auto& nom = bank.registry.nominal();
  std::mt19937_64 rng(404);
  std::vector<std::pair<FaultSite, SignalFault>> faults;
  for (std::size_t j = 0; j < 5; ++j) {
    faults.push_back({FaultSite::Input, SignalFault::loss(j)});
    faults.push_back({FaultSite::Input, SignalFault::scale(j, 1.2)});
    faults.push_back({FaultSite::Output, SignalFault::loss(j)});
    faults.push_back({FaultSite::Output, SignalFault::scale(j, 1.1)});
  }
  for (const auto& [site, fault] : faults) {
    for (int trial = 0; trial < 5; ++trial) {
      const Vector x0 = uniform_vector(10, rng, 0.05);
      const Vector xhat0 = uniform_vector(10, rng, 0.05);
      const Vector amp = uniform_vector(5, rng, 0.1);
      const InputSignal v = [amp](double t) -> Vector { return amp * std::sin(3.0 * t); };
      const auto report = verify_equivalence(nom, bank.gains, site, fault, x0, xhat0, v);
      EXPECT_TRUE(report.passed()) << "deviation " << report.max_deviation();
      EXPECT_LE(report.max_deviation(), 1e-9);
      EXPECT_EQ(report.steps, 1000u);
    }
  }
}

TEST(ExogenousMap, HealthyFaultGivesZeroDeviation) {
  const auto& bank = fixture::desk_bank();
  std::mt19937_64 rng(5);
  const Vector x0 = uniform_vector(10, rng, 0.05);
  const auto report = verify_equivalence(bank.registry.nominal(), bank.gains, FaultSite::Output,
                                         SignalFault::scale(2, 1.0), x0, Vector::Zero(10));
  EXPECT_EQ(report.max_deviation(), 0.0);
}

TEST(ExogenousMap, MeasurementOnlyTapDoesNotMatch) {
  const auto& bank = fixture::desk_bank();
  std::mt19937_64 rng(6);
  const Vector x0 = uniform_vector(10, rng, 0.05);
  const Vector xhat0 = uniform_vector(10, rng, 0.05);
  EquivalenceOptions opts;
  opts.tap = OutputFaultTap::MeasurementOnly;
  const auto report = verify_equivalence(bank.registry.nominal(), bank.gains, FaultSite::Output,
                                         SignalFault::loss(1), x0, xhat0, {}, opts);
  EXPECT_FALSE(report.passed());
  EXPECT_GT(report.max_deviation(), 1e-6);
}

TEST(ExogenousMap, OffsetFaultIsSimulatedButNotEquivalent) {
  const auto& bank = fixture::desk_bank();
  const auto report = verify_equivalence(bank.registry.nominal(), bank.gains, FaultSite::Input,
                                         SignalFault{0, 1.0, 0.1}, Vector::Zero(10), Vector::Zero(10));
  EXPECT_FALSE(report.passed());
}
