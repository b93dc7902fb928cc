#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gridshs/error.hpp"
#include "gridshs/features.hpp"

using namespace gridshs;
using namespace gridshs::features;

namespace {

sim::OutputTrace trace(const Matrix& m, int window = 0) {
  sim::OutputTrace t;
  t.samples = m;
  t.window = window;
  return t;
}

}  // namespace

TEST(Features, ErrorIsAbsoluteDifference) {
  Matrix a(2, 2), b(2, 2);
  a << 1, -2, 3, 4;
  b << 0, 1, 3, 6;
  const auto e = error_window(trace(a), trace(b));
  Matrix expected(2, 2);
  expected << 1, 3, 0, 2;
  EXPECT_EQ(e.e, expected);
}

TEST(Features, AggregateIsLogOfColumnSums) {
  Matrix e(3, 2);
  e << 0.1, 0.0, 0.2, 0.0, 0.3, 0.0;
  const auto f = aggregate({e, 4});
  EXPECT_NEAR(f.E(0), std::log(0.6 + 1e-12), 1e-15);
  EXPECT_DOUBLE_EQ(f.E(1), std::log(1e-12));
  EXPECT_EQ(f.window, 4);
}

TEST(Features, LowerBoundWithEqualityOnlyForZeroColumns) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const double eps : {1e-12, 1e-6, 1e-2}) {
    for (int trial = 0; trial < 50; ++trial) {
      Matrix e(20, 6);
      for (Eigen::Index c = 0; c < e.cols(); ++c) {
        const bool zero = u(rng) < 0.3;
        for (Eigen::Index r = 0; r < e.rows(); ++r) {
          e(r, c) = zero ? 0.0 : (u(rng) < 0.5 ? 0.0 : u(rng) * std::pow(10.0, -8.0 * u(rng)));
        }
      }
      const auto f = aggregate({e, 0}, eps);
      for (Eigen::Index c = 0; c < e.cols(); ++c) {
        EXPECT_GE(f.E(c), std::log(eps));
        EXPECT_EQ(f.E(c) == std::log(eps), e.col(c).isZero(0.0)) << "column " << c;
      }
    }
  }
}

TEST(Features, RawSequenceIsColumnMajor) {
  Matrix e(2, 3);
  e << 1, 2, 3, 4, 5, 6;
  const Vector raw = raw_sequence({e, 0});
  Vector expected(6);
  expected << 1, 4, 2, 5, 3, 6;
  EXPECT_EQ(raw, expected);
}

TEST(Features, RejectsMismatchedInputs) {
  EXPECT_THROW(error_window(trace(Matrix::Zero(2, 2)), trace(Matrix::Zero(3, 2))), Error);
  EXPECT_THROW(error_window(trace(Matrix::Zero(2, 2), 1), trace(Matrix::Zero(2, 2), 2)), Error);
  EXPECT_THROW(aggregate({Matrix::Zero(2, 2), 0}, 0.0), Error);
}
