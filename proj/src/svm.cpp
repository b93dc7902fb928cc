#include "gridshs/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "gridshs/error.hpp"
#include "gridshs/evaluate.hpp"

namespace gridshs::learning {
namespace {

constexpr double kTau = 1e-12;

bool in_up(double y, double a, double C) { return (y > 0 && a < C) || (y < 0 && a > 0); }
bool in_low(double y, double a, double C) { return (y > 0 && a > 0) || (y < 0 && a < C); }

}  // namespace

Matrix rbf_kernel(const Matrix& X1, const Matrix& X2, double gamma) {
  if (X1.cols() != X2.cols()) throw Error(ErrorCategory::dimension_mismatch, "kernel inputs differ in width");
  const Vector n1 = X1.rowwise().squaredNorm();
  const Vector n2 = X2.rowwise().squaredNorm();
  Matrix D = -2.0 * X1 * X2.transpose();
  D.colwise() += n1;
  D.rowwise() += n2.transpose();
  return (-gamma * D.cwiseMax(0.0)).array().exp().matrix();
}

BinarySolution smo_solve(const Matrix& K, const Vector& y, double C, const SvmOptions& options) {
  const Eigen::Index n = y.size();
  if (K.rows() != n || K.cols() != n) throw Error(ErrorCategory::dimension_mismatch, "kernel must be n x n");
  if (!(C > 0.0)) throw Error(ErrorCategory::invalid_input, "penalty C must be > 0");
  bool pos = false, neg = false;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (y(t) == 1.0) pos = true;
    else if (y(t) == -1.0) neg = true;
    else throw Error(ErrorCategory::invalid_input, "binary targets must be +1 or -1");
  }
  if (!pos || !neg) throw Error(ErrorCategory::invalid_input, "binary machine needs both classes");

  BinarySolution s;
  s.alpha = Vector::Zero(n);
  Vector& a = s.alpha;
  Vector G = -Vector::Ones(n);  // gradient of the dual objective
  for (;;) {
    Eigen::Index i = -1, j = -1;
    double m = -std::numeric_limits<double>::infinity();
    double M = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = -y(t) * G(t);
      if (in_up(y(t), a(t), C) && v > m) {
        m = v;
        i = t;
      }
      if (in_low(y(t), a(t), C) && v < M) {
        M = v;
        j = t;
      }
    }
    s.kkt_gap = m - M;
    if (i < 0 || j < 0 || s.kkt_gap <= options.tolerance) break;
    if (s.iterations >= options.max_iterations) {
      throw Error(ErrorCategory::not_converged,
                  "SMO hit the cap of " + std::to_string(options.max_iterations) +
                      " iterations with KKT gap " + std::to_string(s.kkt_gap) + " (C=" +
                      std::to_string(C) + ", n=" + std::to_string(n) + ")");
    }
    ++s.iterations;

    const double Qii = K(i, i), Qjj = K(j, j), Qij = y(i) * y(j) * K(i, j);
    const double ai = a(i), aj = a(j);
    if (y(i) != y(j)) {
      double quad = Qii + Qjj + 2.0 * Qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G(i) - G(j)) / quad;
      const double diff = a(i) - a(j);
      a(i) += delta;
      a(j) += delta;
      if (diff > 0) {
        if (a(j) < 0) { a(j) = 0; a(i) = diff; }
      } else if (a(i) < 0) { a(i) = 0; a(j) = -diff; }
      if (diff > 0) {
        if (a(i) > C) { a(i) = C; a(j) = C - diff; }
      } else if (a(j) > C) { a(j) = C; a(i) = C + diff; }
    } else {
      double quad = Qii + Qjj - 2.0 * Qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (G(i) - G(j)) / quad;
      const double sum = a(i) + a(j);
      a(i) -= delta;
      a(j) += delta;
      if (sum > C) {
        if (a(i) > C) { a(i) = C; a(j) = sum - C; }
      } else if (a(j) < 0) { a(j) = 0; a(i) = sum; }
      if (sum > C) {
        if (a(j) > C) { a(j) = C; a(i) = sum - C; }
      } else if (a(i) < 0) { a(i) = 0; a(j) = sum; }
    }
    const double di = a(i) - ai, dj = a(j) - aj;
    G += (y(i) * di) * y.cwiseProduct(K.col(i)) + (y(j) * dj) * y.cwiseProduct(K.col(j));
  }

  // rho = average of y G over free vectors, midpoint of the bounds otherwise.
  double sum = 0.0, ub = std::numeric_limits<double>::infinity(), lb = -ub;
  int free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yG = y(t) * G(t);
    if (a(t) > 0.0 && a(t) < C) {
      sum += yG;
      ++free;
    } else if ((a(t) >= C && y(t) < 0) || (a(t) <= 0.0 && y(t) > 0)) {
      ub = std::min(ub, yG);
    } else {
      lb = std::max(lb, yG);
    }
  }
  const double rho = free > 0 ? sum / free : 0.5 * (ub + lb);
  s.bias = -rho;
  return s;
}

double dual_objective(const Matrix& K, const Vector& y, const Vector& alpha) {
  const Vector ay = alpha.cwiseProduct(y);
  return 0.5 * ay.dot(K * ay) - alpha.sum();
}

Scaler Scaler::fit(const Matrix& X) {
  Scaler s;
  const double rows = static_cast<double>(X.rows());
  s.mean = X.colwise().mean().transpose();
  s.scale.resize(X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double var = (X.col(c).array() - s.mean(c)).square().sum() / std::max(1.0, rows);
    s.scale(c) = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Vector Scaler::apply(const Vector& x) const { return (x - mean).cwiseQuotient(scale); }

Matrix Scaler::apply(const Matrix& X) const {
  Matrix out = X.rowwise() - mean.transpose();
  return out.array().rowwise() / scale.transpose().array();
}

double BinaryMachine::decision(const Vector& x, double gamma) const {
  double f = bias;
  for (Eigen::Index j = 0; j < support.rows(); ++j) {
    f += alpha(j) * y(j) * std::exp(-gamma * (support.row(j).transpose() - x).squaredNorm());
  }
  return f;
}

SvmModel svm_train(const Matrix& X, const std::vector<int>& labels, double C, double gamma,
                   const SvmOptions& options) {
  if (static_cast<std::size_t>(X.rows()) != labels.size() || labels.empty()) {
    throw Error(ErrorCategory::dimension_mismatch, "SVM needs one label per row");
  }
  if (!(C > 0.0) || !(gamma > 0.0)) throw Error(ErrorCategory::invalid_input, "SVM needs C > 0 and gamma > 0");
  const std::set<int> classes(labels.begin(), labels.end());
  if (classes.size() < 2) throw Error(ErrorCategory::invalid_input, "SVM needs at least two classes");

  SvmModel model;
  model.C = C;
  model.gamma = gamma;
  model.scaler = Scaler::fit(X);
  const Matrix Z = model.scaler.apply(X);
  const Matrix K = rbf_kernel(Z, Z, gamma);
  for (const int c : classes) {
    Vector y(Z.rows());
    for (Eigen::Index t = 0; t < Z.rows(); ++t) y(t) = labels[static_cast<std::size_t>(t)] == c ? 1.0 : -1.0;
    const auto sol = smo_solve(K, y, C, options);
    BinaryMachine m;
    m.positive_class = c;
    m.bias = sol.bias;
    m.iterations = sol.iterations;
    std::vector<Eigen::Index> sv;
    for (Eigen::Index t = 0; t < Z.rows(); ++t) {
      if (sol.alpha(t) > 0.0) sv.push_back(t);
    }
    m.support.resize(static_cast<Eigen::Index>(sv.size()), Z.cols());
    m.alpha.resize(static_cast<Eigen::Index>(sv.size()));
    m.y.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t k = 0; k < sv.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      m.support.row(kk) = Z.row(sv[k]);
      m.alpha(kk) = sol.alpha(sv[k]);
      m.y(kk) = y(sv[k]);
    }
    model.machines.push_back(std::move(m));
  }
  return model;
}

SvmModel svm_train(const Dataset& data, double C, double gamma, const SvmOptions& options) {
  data.validate();
  return svm_train(data.features(), data.labels(), C, gamma, options);
}

Vector svm_decision_values(const SvmModel& model, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != model.dimension()) {
    throw Error(ErrorCategory::dimension_mismatch, "query width does not match the SVM");
  }
  const Vector z = model.scaler.apply(x);
  Vector f(static_cast<Eigen::Index>(model.machines.size()));
  for (std::size_t c = 0; c < model.machines.size(); ++c) {
    f(static_cast<Eigen::Index>(c)) = model.machines[c].decision(z, model.gamma);
  }
  return f;
}

namespace {

int argmax_index(const Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return static_cast<int>(best);
}

Vector calibrated_scores(const SvmCalibration& cal, const Vector& f) {
  Vector s(f.size());
  for (Eigen::Index c = 0; c < f.size(); ++c) {
    const auto cc = static_cast<std::size_t>(c);
    s(c) = PlattSigmoid{cal.a[cc], cal.b[cc]}(f(c)) / cal.theta[cc];
  }
  return s;
}

}  // namespace

int svm_predict(const SvmModel& model, const Vector& x) {
  const Vector f = svm_decision_values(model, x);
  const int idx = model.calibration.enabled ? argmax_index(calibrated_scores(model.calibration, f))
                                            : argmax_index(f);
  return model.machines[static_cast<std::size_t>(idx)].positive_class;
}

double PlattSigmoid::operator()(double f) const {
  const double z = a * f + b;
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

PlattSigmoid fit_platt(const std::vector<double>& dec, const std::vector<int>& target) {
  if (dec.size() != target.size() || dec.empty()) {
    throw Error(ErrorCategory::invalid_input, "Platt fit needs one target per decision value");
  }
  double prior1 = 0, prior0 = 0;
  for (const int t : target) (t ? prior1 : prior0) += 1;
  if (prior1 == 0 || prior0 == 0) throw Error(ErrorCategory::invalid_input, "Platt fit needs both targets present");
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  const std::size_t n = dec.size();
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = target[i] ? hi : lo;

  // Parameterized as P = 1 / (1 + exp(A f + B)); returned as a = -A, b = -B.
  double A = 0.0, B = std::log((prior0 + 1.0) / (prior1 + 1.0));
  auto objective = [&](double A_, double B_) {
    double fval = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = dec[i] * A_ + B_;
      fval += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return fval;
  };
  double fval = objective(A, B);
  constexpr double kSigma = 1e-12, kEps = 1e-5, kMinStep = 1e-10;
  for (int it = 0; it < 100; ++it) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = dec[i] * A + B;
      double p, q;
      if (z >= 0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += dec[i] * dec[i] * d2;
      h22 += d2;
      h21 += dec[i] * d2;
      const double d1 = t[i] - p;
      g1 += dec[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < kEps && std::abs(g2) < kEps) break;
    const double det = h11 * h22 - h21 * h21;
    const double dA = -(h22 * g1 - h21 * g2) / det;
    const double dB = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * dA + g2 * dB;
    double step = 1.0;
    bool moved = false;
    while (step >= kMinStep) {
      const double nA = A + step * dA, nB = B + step * dB;
      const double nf = objective(nA, nB);
      if (nf < fval + 1e-4 * step * gd) {
        A = nA;
        B = nB;
        fval = nf;
        moved = true;
        break;
      }
      step /= 2.0;
    }
    if (!moved) break;
  }
  return {-A, -B};
}

double macro_accuracy(const Matrix& P, const std::vector<int>& labels, const std::vector<int>& classes,
                      const std::vector<double>& theta) {
  std::vector<double> hit(classes.size(), 0.0), total(classes.size(), 0.0);
  for (Eigen::Index r = 0; r < P.rows(); ++r) {
    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const double s = P(r, static_cast<Eigen::Index>(c)) / theta[c];
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    const auto truth = std::find(classes.begin(), classes.end(), labels[static_cast<std::size_t>(r)]);
    if (truth == classes.end()) continue;
    const auto tc = static_cast<std::size_t>(truth - classes.begin());
    total[tc] += 1;
    if (best == tc) hit[tc] += 1;
  }
  double sum = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (total[c] > 0) {
      sum += hit[c] / total[c];
      ++present;
    }
  }
  return present ? sum / present : 0.0;
}

std::vector<double> tune_thresholds(const Matrix& P, const std::vector<int>& labels,
                                    const std::vector<int>& classes) {
  std::vector<double> theta(classes.size(), 0.5);
  double best = macro_accuracy(P, labels, classes, theta);
  for (int round = 0; round < 20; ++round) {
    bool improved = false;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      for (int g = 1; g <= 19; ++g) {
        auto trial = theta;
        trial[c] = 0.05 * g;
        const double acc = macro_accuracy(P, labels, classes, trial);
        if (acc > best + 1e-12) {
          best = acc;
          theta = trial;
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
  return theta;
}

SvmModel svm_calibrate(const SvmModel& model, const Dataset& train, std::size_t folds,
                       std::uint64_t seed, const SvmOptions& options) {
  train.validate();
  const auto labels = train.labels();
  const auto assignment = stratified_folds(labels, folds, seed);
  const std::size_t n = labels.size();
  const std::size_t c = model.machines.size();
  std::vector<int> classes;
  for (const auto& m : model.machines) classes.push_back(m.positive_class);

  Matrix F(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c));
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> fit_rows, held;
    for (std::size_t i = 0; i < n; ++i) (assignment[i] == static_cast<int>(f) ? held : fit_rows).push_back(i);
    const Dataset fit = train.subset(fit_rows);
    const auto fit_labels = fit.labels();
    if (std::set<int>(fit_labels.begin(), fit_labels.end()).size() != c) {
      throw Error(ErrorCategory::invalid_input, "calibration fold is missing a class");
    }
    const SvmModel sub = svm_train(fit, model.C, model.gamma, options);
    for (const std::size_t i : held) {
      F.row(static_cast<Eigen::Index>(i)) = svm_decision_values(sub, train.rows[i].E).transpose();
    }
  }

  SvmModel out = model;
  SvmCalibration cal;
  cal.a.resize(c);
  cal.b.resize(c);
  Matrix P(F.rows(), F.cols());
  for (std::size_t k = 0; k < c; ++k) {
    std::vector<double> dec(n);
    std::vector<int> target(n);
    for (std::size_t i = 0; i < n; ++i) {
      dec[i] = F(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      target[i] = labels[i] == classes[k] ? 1 : 0;
    }
    const PlattSigmoid s = fit_platt(dec, target);
    cal.a[k] = s.a;
    cal.b[k] = s.b;
    for (std::size_t i = 0; i < n; ++i) P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = s(dec[i]);
  }
  // exp(f - max f) is positive and keeps the argmax of the raw decisions.
  const Matrix shifted = (F.colwise() - F.rowwise().maxCoeff()).array().exp().matrix();
  cal.uncalibrated_macro = macro_accuracy(shifted, labels, classes, std::vector<double>(c, 1.0));
  cal.theta = tune_thresholds(P, labels, classes);
  cal.calibrated_macro = macro_accuracy(P, labels, classes, cal.theta);
  cal.enabled = cal.calibrated_macro >= cal.uncalibrated_macro;
  out.calibration = cal;
  return out;
}

}  // namespace gridshs::learning
