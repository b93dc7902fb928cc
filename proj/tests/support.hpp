#pragma once

#include <algorithm>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include "gridshs/pipeline.hpp"

namespace gridshs::fixture {

/// Two machines on buses 1 and 2 joined by one line, equal operating angles.
inline grid::GridSpec two_machine_grid(double b, double M1, double D1, double M2, double D2) {
  grid::GridSpec g;
  g.buses = {1, 2};
  g.lines = {{1, 2, b}};
  g.generators = {{1, M1, D1, 0.0}, {2, M2, D2, 0.0}};
  g.sensors = {{0, grid::SensedState::Angle}, {1, grid::SensedState::Angle}};
  return g;
}

/// Built once per test binary: the 94-scenario desk bank.
inline const pipeline::ModelBank& desk_bank() {
  static const pipeline::ModelBank bank = pipeline::build_bank(pipeline::desk_config());
  return bank;
}

/// Minimum-cost matching by trying every permutation.
inline double brute_force_matching(const ComplexList& a, const ComplexList& b) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[perm[i]]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Classical fourth-order Runge-Kutta for x' = A x + B u with constant u.
inline Vector rk4_constant_input(const Matrix& A, const Matrix& B, const Vector& x0, const Vector& u, double h,
                                 std::size_t steps) {
  Vector x = x0;
  const Vector Bu = B.cols() ? Vector(B * u) : Vector::Zero(x0.size());
  for (std::size_t k = 0; k < steps; ++k) {
    const Vector k1 = A * x + Bu;
    const Vector k2 = A * (x + 0.5 * h * k1) + Bu;
    const Vector k3 = A * (x + 0.5 * h * k2) + Bu;
    const Vector k4 = A * (x + h * k3) + Bu;
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

}  // namespace gridshs::fixture
