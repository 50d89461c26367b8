#pragma once

// Soft-margin SVM trained with sequential minimal optimization, and the
// one-vs-one composition used for the three vigilance classes.
//
// Decision function: f(x) = sum_i coef_i * K(sv_i, x) + bias, coef_i = alpha_i * y_i.
// RBF kernel: exp(-|x - y|^2 / scale^2). With scale = sqrt(n) for n features
// the exponent is -|x - y|^2 / n.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vigil/common.hpp"
#include "vigil/rng.hpp"
#include "vigil/signal.hpp"

namespace vigil {

enum class KernelKind : std::uint8_t { Linear = 0, Rbf = 1 };

inline std::string to_string(KernelKind k) { return k == KernelKind::Linear ? "linear" : "rbf"; }

struct KernelSpec {
  KernelKind kind = KernelKind::Rbf;
  double scale = 1.0;  // RBF only

  static KernelSpec linear() { return {KernelKind::Linear, 1.0}; }
  static KernelSpec rbf(double scale) {
    if (!(scale > 0.0)) throw DomainError("RBF kernel scale must be positive");
    return {KernelKind::Rbf, scale};
  }
  /// Scale sqrt(n) for n-dimensional features.
  static KernelSpec rbf_for_dimension(std::size_t n) { return rbf(std::sqrt(static_cast<double>(n))); }

  bool operator==(const KernelSpec&) const = default;
};

inline double kernel_eval(const KernelSpec& k, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw DomainError("kernel_eval: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                      std::to_string(y.size()) + ")");
  if (k.kind == KernelKind::Linear) {
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
    return dot;
  }
  if (!(k.scale > 0.0)) throw DomainError("RBF kernel scale must be positive");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    d2 += d * d;
  }
  return std::exp(-d2 / (k.scale * k.scale));
}

struct TrainConfig {
  double C = 1.0;
  double tol = 1e-3;
  /// Training stops after this many consecutive full sweeps without an update.
  int max_passes = 10;
  std::uint64_t seed = 0;
  /// Hard cap on successful pair updates; 0 picks 1000 * n + 100000.
  std::size_t max_iterations = 0;
  /// Record the dual objective after every accepted update (diagnostics).
  bool record_objective = false;
};

inline void check(const TrainConfig& cfg) {
  if (!(cfg.C > 0.0)) throw DomainError("TrainConfig: C must be positive");
  if (!(cfg.tol > 0.0)) throw DomainError("TrainConfig: tol must be positive");
  if (cfg.max_passes < 1) throw DomainError("TrainConfig: max_passes must be >= 1");
}

/// Full dual solution over the training set.
struct SmoSolution {
  std::vector<double> alphas;  // in [0, C], one per training example
  double bias = 0.0;
  std::size_t iterations = 0;
  std::size_t sweeps = 0;
  bool converged = false;
  std::vector<double> objective_history;
};

namespace detail {

class KernelRows {
public:
  KernelRows(const Matrix<double>& x, const KernelSpec& k) : x_(x), k_(k), n_(x.rows()) {
    if (n_ <= kPrecomputeLimit) {
      gram_.resize(n_ * n_);
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i; j < n_; ++j)
          gram_[i * n_ + j] = gram_[j * n_ + i] = kernel_eval(k_, x_.row(i), x_.row(j));
    } else {
      diag_.resize(n_);
      for (std::size_t i = 0; i < n_; ++i) diag_[i] = kernel_eval(k_, x_.row(i), x_.row(i));
    }
  }

  double operator()(std::size_t i, std::size_t j) const {
    if (!gram_.empty()) return gram_[i * n_ + j];
    if (i == j) return diag_[i];
    return kernel_eval(k_, x_.row(i), x_.row(j));
  }

  /// Row i as a span; computed into `scratch` when the Gram matrix is not stored.
  std::span<const double> row(std::size_t i, std::vector<double>& scratch) const {
    if (!gram_.empty()) return {gram_.data() + i * n_, n_};
    scratch.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) scratch[j] = (*this)(i, j);
    return scratch;
  }

private:
  static constexpr std::size_t kPrecomputeLimit = 2500;
  const Matrix<double>& x_;
  KernelSpec k_;
  std::size_t n_;
  std::vector<double> gram_;
  std::vector<double> diag_;
};

class SmoSolver {
public:
  SmoSolver(const Matrix<double>& x, std::span<const int> y, const KernelSpec& k, const TrainConfig& cfg)
      : k_(x, k), y_(y.begin(), y.end()), cfg_(cfg), n_(x.rows()), rng_(cfg.seed),
        alpha_(n_, 0.0), f_(n_, 0.0) {}

  SmoSolution solve() {
    const std::size_t budget = cfg_.max_iterations ? cfg_.max_iterations : 1000 * n_ + 100000;
    bool examine_all = true;
    int quiet_sweeps = 0;
    SmoSolution out;
    if (cfg_.record_objective) out.objective_history.push_back(0.0);

    while (iterations_ < budget) {
      std::size_t changed = 0;
      const auto order = permutation(n_, rng_);
      if (examine_all) {
        for (std::size_t i : order) {
          changed += examine(i, out);
          if (iterations_ >= budget) break;
        }
        ++out.sweeps;
      } else {
        for (std::size_t i : order) {
          if (is_bound(i)) continue;
          changed += examine(i, out);
          if (iterations_ >= budget) break;
        }
      }
      if (examine_all) {
        quiet_sweeps = changed == 0 ? quiet_sweeps + 1 : 0;
        if (quiet_sweeps >= cfg_.max_passes) {
          out.converged = true;
          break;
        }
        if (changed > 0) examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }
    if (!out.converged) warn("SMO stopped after " + std::to_string(iterations_) + " updates without converging");
    out.alphas = alpha_;
    out.bias = b_;
    out.iterations = iterations_;
    return out;
  }

private:
  double error(std::size_t i) const { return f_[i] + b_ - y_[i]; }
  bool is_bound(std::size_t i) const { return alpha_[i] <= 0.0 || alpha_[i] >= cfg_.C; }

  std::size_t examine(std::size_t i2, SmoSolution& out) {
    const double y2 = y_[i2];
    const double a2 = alpha_[i2];
    const double e2 = error(i2);
    const double r2 = e2 * y2;
    if (!((r2 < -cfg_.tol && a2 < cfg_.C) || (r2 > cfg_.tol && a2 > 0.0))) return 0;

    // Second choice: a seeded random partner first, then every non-bound
    // example, then everything, each scan from a random offset.
    if (n_ > 1) {
      const auto j = static_cast<std::size_t>(rng_.below(n_));
      if (take_step(j, i2, out)) return 1;
    }
    const auto start = static_cast<std::size_t>(rng_.below(n_));
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t i1 = (start + k) % n_;
      if (!is_bound(i1) && take_step(i1, i2, out)) return 1;
    }
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t i1 = (start + k) % n_;
      if (is_bound(i1) && take_step(i1, i2, out)) return 1;
    }
    return 0;
  }

  bool take_step(std::size_t i1, std::size_t i2, SmoSolution& out) {
    if (i1 == i2) return false;
    const double C = cfg_.C;
    const double a1 = alpha_[i1], a2 = alpha_[i2];
    const double y1 = y_[i1], y2 = y_[i2];
    const double e1 = error(i1), e2 = error(i2);
    const double s = y1 * y2;

    double lo, hi;
    if (s < 0) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(C, C + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - C);
      hi = std::min(C, a1 + a2);
    }
    if (lo >= hi) return false;

    const double k11 = k_(i1, i1), k12 = k_(i1, i2), k22 = k_(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;
    double a2new;
    if (eta > 1e-12) {
      a2new = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
    } else {
      // Objective is linear along the constraint line; take the better end.
      // v_i is the part of f(x_i) contributed by every other example.
      const double v1 = f_[i1] - y1 * a1 * k11 - y2 * a2 * k12;
      const double v2 = f_[i2] - y1 * a1 * k12 - y2 * a2 * k22;
      auto obj = [&](double a2c) {
        const double a1c = a1 + s * (a2 - a2c);
        return a1c + a2c - 0.5 * a1c * a1c * k11 - 0.5 * a2c * a2c * k22 - s * a1c * a2c * k12 -
               y1 * a1c * v1 - y2 * a2c * v2;
      };
      const double lobj = obj(lo), hobj = obj(hi);
      if (lobj > hobj + 1e-12)
        a2new = lo;
      else if (hobj > lobj + 1e-12)
        a2new = hi;
      else
        return false;
    }
    const double eps = 1e-10;
    if (a2new < eps) a2new = 0.0;
    if (a2new > C - eps) a2new = C;
    if (std::abs(a2new - a2) < eps * (a2new + a2 + eps)) return false;

    double a1new = a1 + s * (a2 - a2new);
    if (a1new < eps) a1new = 0.0;
    if (a1new > C - eps) a1new = C;

    const double d1 = y1 * (a1new - a1);
    const double d2 = y2 * (a2new - a2);
    const double b1 = b_ - e1 - d1 * k11 - d2 * k12;
    const double b2 = b_ - e2 - d1 * k12 - d2 * k22;
    if (a1new > 0.0 && a1new < C)
      b_ = b1;
    else if (a2new > 0.0 && a2new < C)
      b_ = b2;
    else
      b_ = 0.5 * (b1 + b2);

    const auto row1 = k_.row(i1, scratch1_);
    const auto row2 = k_.row(i2, scratch2_);
    for (std::size_t i = 0; i < n_; ++i) f_[i] += d1 * row1[i] + d2 * row2[i];
    alpha_[i1] = a1new;
    alpha_[i2] = a2new;
    ++iterations_;
    if (cfg_.record_objective) out.objective_history.push_back(dual_objective());
    return true;
  }

  double dual_objective() const {
    double sum_a = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      sum_a += alpha_[i];
      quad += alpha_[i] * y_[i] * f_[i];
    }
    return sum_a - 0.5 * quad;
  }

  KernelRows k_;
  std::vector<double> y_;
  TrainConfig cfg_;
  std::size_t n_;
  Rng rng_;
  std::vector<double> alpha_;
  std::vector<double> f_;  // sum_j alpha_j y_j K(i, j), bias excluded
  double b_ = 0.0;
  std::size_t iterations_ = 0;
  std::vector<double> scratch1_, scratch2_;
};

}  // namespace detail

/// Solves the SVM dual for labels in {-1, +1}.
inline SmoSolution solve_smo(const Matrix<double>& x, std::span<const int> y, const KernelSpec& kernel,
                             const TrainConfig& cfg) {
  check(cfg);
  if (x.rows() != y.size()) throw DomainError("solve_smo: feature/label count mismatch");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1)
      pos = true;
    else if (v == -1)
      neg = true;
    else
      throw DomainError("solve_smo: labels must be -1 or +1");
  }
  if (!pos || !neg) throw DomainError("train_binary: need at least one example of each sign");
  return detail::SmoSolver(x, y, kernel, cfg).solve();
}

/// Dual objective sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij.
inline double dual_objective(const Matrix<double>& x, std::span<const int> y, const KernelSpec& kernel,
                             std::span<const double> alphas) {
  double sum_a = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    sum_a += alphas[i];
    if (alphas[i] == 0.0) continue;
    for (std::size_t j = 0; j < x.rows(); ++j)
      if (alphas[j] != 0.0) quad += alphas[i] * alphas[j] * y[i] * y[j] * kernel_eval(kernel, x.row(i), x.row(j));
  }
  return sum_a - 0.5 * quad;
}

struct BinarySvmModel {
  Matrix<double> support_vectors;
  std::vector<double> coef;  // alpha_i * y_i
  double bias = 0.0;
  KernelSpec kernel;
  std::pair<VigilanceClass, VigilanceClass> class_pair{VigilanceClass::Awake, VigilanceClass::Tired};

  std::size_t dimension() const noexcept { return support_vectors.cols(); }

  double decision(std::span<const double> x) const {
    if (x.size() != dimension())
      throw DomainError("decision: feature dimension " + std::to_string(x.size()) + ", model expects " +
                        std::to_string(dimension()));
    double f = bias;
    for (std::size_t i = 0; i < coef.size(); ++i) f += coef[i] * kernel_eval(kernel, support_vectors.row(i), x);
    return f;
  }

  bool operator==(const BinarySvmModel&) const = default;
};

/// Keeps examples with nonzero alpha as support vectors.
inline BinarySvmModel make_binary_model(const Matrix<double>& x, std::span<const int> y, const KernelSpec& kernel,
                                        const SmoSolution& sol) {
  BinarySvmModel m;
  m.kernel = kernel;
  m.bias = sol.bias;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (sol.alphas[i] == 0.0) continue;
    m.support_vectors.append_row(x.row(i));
    m.coef.push_back(sol.alphas[i] * y[i]);
  }
  if (m.coef.empty()) m.support_vectors = Matrix<double>(0, x.cols());
  return m;
}

inline BinarySvmModel train_binary(const Matrix<double>& x, std::span<const int> y, const KernelSpec& kernel,
                                   const TrainConfig& cfg) {
  return make_binary_model(x, y, kernel, solve_smo(x, y, kernel, cfg));
}

struct OvoModel {
  std::vector<BinarySvmModel> binaries;
  std::vector<VigilanceClass> classes;
  KernelSpec kernel;

  std::size_t dimension() const noexcept { return binaries.empty() ? 0 : binaries.front().dimension(); }
  bool operator==(const OvoModel&) const = default;
};

/// Class pairs in training order: (Awake,Tired), (Awake,Drowsy), (Tired,Drowsy).
inline std::vector<std::pair<VigilanceClass, VigilanceClass>> class_pairs() {
  std::vector<std::pair<VigilanceClass, VigilanceClass>> out;
  for (std::size_t a = 0; a < kNumClasses; ++a)
    for (std::size_t b = a + 1; b < kNumClasses; ++b) out.emplace_back(kAllClasses[a], kAllClasses[b]);
  return out;
}

/// One binary per class pair present in the data; the lower class of each
/// pair is labelled -1.
inline OvoModel train_ovo(const Matrix<double>& x, std::span<const VigilanceClass> labels, const KernelSpec& kernel,
                          const TrainConfig& cfg) {
  check(cfg);
  if (x.rows() != labels.size()) throw DomainError("train_ovo: feature/label count mismatch");
  std::array<std::size_t, kNumClasses> counts{};
  for (auto c : labels) ++counts[index_of(c)];
  const auto present = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
  if (present < 2) throw DomainError("train_ovo: need at least two distinct classes");

  OvoModel model;
  model.kernel = kernel;
  for (auto c : kAllClasses)
    if (counts[index_of(c)] > 0) model.classes.push_back(c);

  std::uint64_t stream = 0;
  for (const auto& [lo, hi] : class_pairs()) {
    ++stream;
    if (counts[index_of(lo)] == 0 || counts[index_of(hi)] == 0) {
      warn("train_ovo: skipping " + std::string(to_string(lo)) + "/" + std::string(to_string(hi)) +
           " classifier, a class has no training examples");
      continue;
    }
    Matrix<double> sub;
    std::vector<int> y;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != lo && labels[i] != hi) continue;
      sub.append_row(x.row(i));
      y.push_back(labels[i] == hi ? 1 : -1);
    }
    TrainConfig pair_cfg = cfg;
    pair_cfg.seed = derive_seed(cfg.seed, stream);
    auto m = train_binary(sub, y, kernel, pair_cfg);
    m.class_pair = {lo, hi};
    model.binaries.push_back(std::move(m));
  }
  return model;
}

/// Majority vote; ties go to the largest summed |decision| among tied
/// classes, then to the lowest class in vigilance order.
inline VigilanceClass resolve_votes(const std::array<int, kNumClasses>& votes,
                                    const std::array<double, kNumClasses>& strength) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && strength[c] > strength[best])) best = c;
  }
  return kAllClasses[best];
}

inline VigilanceClass predict_ovo(const OvoModel& model, std::span<const double> x) {
  if (model.binaries.empty()) throw DomainError("predict_ovo: model has no classifiers");
  if (x.size() != model.dimension())
    throw DomainError("predict_ovo: feature dimension " + std::to_string(x.size()) + ", model expects " +
                      std::to_string(model.dimension()));
  std::array<int, kNumClasses> votes{};
  std::array<double, kNumClasses> strength{};
  for (const auto& b : model.binaries) {
    const double f = b.decision(x);
    const auto winner = f > 0.0 ? b.class_pair.second : b.class_pair.first;
    ++votes[index_of(winner)];
    strength[index_of(winner)] += std::abs(f);
  }
  return resolve_votes(votes, strength);
}

inline std::vector<VigilanceClass> predict_ovo(const OvoModel& model, const Matrix<double>& x) {
  std::vector<VigilanceClass> out;
  out.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(predict_ovo(model, x.row(i)));
  return out;
}

}  // namespace vigil
