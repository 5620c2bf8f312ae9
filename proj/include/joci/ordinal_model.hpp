#pragma once

// Margin-based ordinal regression with monotone thresholds, plus the four
// reference baselines. The default loss is all-threshold logistic: every
// class boundary contributes a logistic penalty with sign s_k(y) = +1 for
// k >= y, -1 otherwise. A squared-error variant on the cumulative-link
// expected label is selectable. Training is deterministic full-batch
// gradient descent with Armijo backtracking; thresholds stay sorted by
// construction (theta_k = theta_1 + softplus increments).

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "joci/corpus_io.hpp"

namespace joci {

enum class LossVariant { all_threshold_logistic, squared_error_link };

inline const char* loss_variant_name(LossVariant v) {
  return v == LossVariant::all_threshold_logistic ? "all-threshold-logistic" : "squared-error-link";
}

inline LossVariant loss_variant_from_name(const std::string& s) {
  if (s == "all-threshold-logistic") return LossVariant::all_threshold_logistic;
  if (s == "squared-error-link") return LossVariant::squared_error_link;
  throw ParseError("unknown loss variant: " + s);
}

struct Standardizer {
  std::vector<double> mean, stdev;

  std::vector<double> apply(const std::vector<double>& x) const {
    if (mean.empty()) return x;
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / stdev[i];
    return out;
  }

  static Standardizer fit(const std::vector<std::vector<double>>& X) {
    Standardizer s;
    if (X.empty()) return s;
    size_t d = X[0].size();
    s.mean.assign(d, 0.0);
    s.stdev.assign(d, 0.0);
    for (const auto& row : X)
      for (size_t i = 0; i < d; ++i) s.mean[i] += row[i];
    for (double& m : s.mean) m /= static_cast<double>(X.size());
    for (const auto& row : X)
      for (size_t i = 0; i < d; ++i) s.stdev[i] += (row[i] - s.mean[i]) * (row[i] - s.mean[i]);
    for (double& v : s.stdev) {
      v = std::sqrt(v / static_cast<double>(X.size()));
      if (v == 0.0) v = 1.0;
    }
    return s;
  }
};

namespace ordinal {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double log1pexp(double t) {
  if (t > 35.0) return t;
  if (t < -35.0) return std::exp(t);
  return t <= 0.0 ? std::log1p(std::exp(t)) : t + std::log1p(std::exp(-t));
}

inline double softplus(double x) { return log1pexp(x); }

// packed parameters: [w_0..w_{d-1}, t1, d2, d3, d4]
inline std::array<double, 4> unpack_thresholds(const std::vector<double>& packed, size_t dim) {
  std::array<double, 4> theta{};
  theta[0] = packed[dim];
  for (size_t k = 1; k < 4; ++k) theta[k] = theta[k - 1] + softplus(packed[dim + k]);
  return theta;
}

// Loss and gradient of the packed objective. grad may be null.
inline double loss_grad(const std::vector<double>& packed,
                        const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                        double lambda, LossVariant variant, std::vector<double>* grad) {
  const size_t n = X.size();
  const size_t d = X.empty() ? 0 : X[0].size();
  std::array<double, 4> theta = unpack_thresholds(packed, d);
  if (grad) grad->assign(packed.size(), 0.0);

  double loss = 0.0;
  std::array<double, 4> dtheta{};
  for (size_t i = 0; i < n; ++i) {
    double z = 0.0;
    for (size_t j = 0; j < d; ++j) z += packed[j] * X[i][j];
    double dz = 0.0;
    if (variant == LossVariant::all_threshold_logistic) {
      for (int k = 0; k < 4; ++k) {
        double s = (k + 1) >= y[i] ? 1.0 : -1.0;
        double a = theta[static_cast<size_t>(k)] - z;
        loss += log1pexp(-s * a);
        double g = -s * sigmoid(-s * a);  // d/da
        dtheta[static_cast<size_t>(k)] += g;
        dz -= g;
      }
    } else {
      double expect = 1.0;
      std::array<double, 4> sig{};
      for (int k = 0; k < 4; ++k) {
        sig[static_cast<size_t>(k)] = sigmoid(z - theta[static_cast<size_t>(k)]);
        expect += sig[static_cast<size_t>(k)];
      }
      double err = expect - static_cast<double>(y[i]);
      loss += err * err;
      for (int k = 0; k < 4; ++k) {
        double sp = sig[static_cast<size_t>(k)] * (1.0 - sig[static_cast<size_t>(k)]);
        dz += 2.0 * err * sp;
        dtheta[static_cast<size_t>(k)] -= 2.0 * err * sp;
      }
    }
    if (grad)
      for (size_t j = 0; j < d; ++j) (*grad)[j] += dz * X[i][j];
  }
  for (size_t j = 0; j < d; ++j) loss += lambda * packed[j] * packed[j];
  if (grad) {
    for (size_t j = 0; j < d; ++j) (*grad)[j] += 2.0 * lambda * packed[j];
    // chain through the increment reparameterization
    (*grad)[d] = dtheta[0] + dtheta[1] + dtheta[2] + dtheta[3];
    for (size_t k = 1; k < 4; ++k) {
      double tail = 0.0;
      for (size_t m = k; m < 4; ++m) tail += dtheta[m];
      (*grad)[d + k] = sigmoid(packed[d + k]) * tail;
    }
  }
  return loss;
}

// Deterministic full-batch gradient descent with Armijo backtracking.
struct GdOptions {
  int max_iters = 2000;
  double tol = 1e-6;  // infinity-norm gradient tolerance
  double armijo_c = 1e-4;
  int max_backtracks = 60;
};

template <class LossGradFn>
inline void minimize(std::vector<double>& params, const GdOptions& opt, LossGradFn&& fn) {
  std::vector<double> grad, trial;
  double step = 1.0;
  double loss = fn(params, &grad);
  for (int it = 0; it < opt.max_iters; ++it) {
    double gnorm_inf = 0.0, gnorm_sq = 0.0;
    for (double g : grad) {
      gnorm_inf = std::max(gnorm_inf, std::abs(g));
      gnorm_sq += g * g;
    }
    if (gnorm_inf <= opt.tol) break;
    double alpha = std::min(1.0, step * 4.0);
    bool accepted = false;
    for (int bt = 0; bt < opt.max_backtracks; ++bt) {
      trial = params;
      for (size_t j = 0; j < trial.size(); ++j) trial[j] -= alpha * grad[j];
      double trial_loss = fn(trial, nullptr);
      if (std::isfinite(trial_loss) && trial_loss <= loss - opt.armijo_c * alpha * gnorm_sq) {
        params = trial;
        loss = fn(params, &grad);
        step = alpha;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // no descent step found
  }
}

}  // namespace ordinal

struct OrdinalModel {
  std::vector<double> weights;
  std::array<double, 4> thresholds{};
  double lambda = 0.0;
  LossVariant variant = LossVariant::all_threshold_logistic;
  Standardizer scaler;
  bool degenerate = false;  // single-class training set
  int degenerate_class = 0;

  double raw_score(const std::vector<double>& x) const {
    std::vector<double> z = scaler.apply(x);
    double s = 0.0;
    for (size_t j = 0; j < weights.size(); ++j) s += weights[j] * z[j];
    return s;
  }
};

struct OrdinalTrainConfig {
  double lambda = 1e-3;
  LossVariant variant = LossVariant::all_threshold_logistic;
  bool standardize = true;
  ordinal::GdOptions gd;
};

inline OrdinalModel train_ordinal(const std::vector<std::vector<double>>& X,
                                  const std::vector<int>& y,
                                  const OrdinalTrainConfig& cfg = {}) {
  if (X.size() != y.size()) throw std::invalid_argument("train_ordinal: X/y size mismatch");
  if (X.size() < 5) throw std::invalid_argument("train_ordinal: need at least 5 samples");
  for (int label : y)
    if (label < 1 || label > 5) throw std::invalid_argument("train_ordinal: label out of range");

  OrdinalModel model;
  model.lambda = cfg.lambda;
  model.variant = cfg.variant;

  bool single_class = true;
  for (int label : y)
    if (label != y[0]) single_class = false;
  if (single_class) {
    model.degenerate = true;
    model.degenerate_class = y[0];
    model.weights.assign(X[0].size(), 0.0);
    // thresholds placed so the zero score always predicts the seen class
    for (int k = 0; k < 4; ++k)
      model.thresholds[static_cast<size_t>(k)] = (k + 1) < y[0] ? -1.0 : 1.0;
    return model;
  }

  std::vector<std::vector<double>> Z = X;
  if (cfg.standardize) {
    model.scaler = Standardizer::fit(X);
    for (auto& row : Z) row = model.scaler.apply(row);
  }

  const size_t d = Z[0].size();
  std::vector<double> packed(d + 4, 0.0);
  packed[d] = -1.5;  // theta_1
  const double unit_increment = std::log(std::expm1(1.0));
  for (size_t k = 1; k < 4; ++k) packed[d + k] = unit_increment;  // softplus == 1

  ordinal::minimize(packed, cfg.gd, [&](const std::vector<double>& p, std::vector<double>* g) {
    double loss = ordinal::loss_grad(p, Z, y, cfg.lambda, cfg.variant, g);
    if (!std::isfinite(loss)) throw std::runtime_error("train_ordinal: non-finite loss");
    return loss;
  });

  model.weights.assign(packed.begin(), packed.begin() + static_cast<long>(d));
  model.thresholds = ordinal::unpack_thresholds(packed, d);
  return model;
}

inline int predict_ordinal(const OrdinalModel& model, const std::vector<double>& x) {
  if (model.degenerate) return model.degenerate_class;
  double s = model.raw_score(x);
  int label = 1;
  for (double theta : model.thresholds)
    if (s > theta) ++label;
  return label;
}

enum class BaselineKind { most_frequent, freq_sampling, rounded_average, one_vs_all_svm };

inline const char* baseline_name(BaselineKind k) {
  switch (k) {
    case BaselineKind::most_frequent: return "Most Frequent";
    case BaselineKind::freq_sampling: return "Freq. Sampling";
    case BaselineKind::rounded_average: return "Rounded Average";
    case BaselineKind::one_vs_all_svm: return "One-vs-All";
  }
  return "?";
}

struct BaselineModel {
  BaselineKind kind = BaselineKind::most_frequent;
  int constant = 3;                    // most_frequent / rounded_average
  std::array<double, 5> distribution{};  // freq_sampling (sums to 1)
  std::uint64_t seed = 0;
  mutable std::uint64_t rng_state = 0;  // freq_sampling draw sequence
  std::array<std::vector<double>, 5> svm_weights;
  std::array<double, 5> svm_bias{};
  Standardizer scaler;
};

namespace ordinal {

inline double svm_loss_grad(const std::vector<double>& packed,
                            const std::vector<std::vector<double>>& X,
                            const std::vector<int>& sign, double lambda,
                            std::vector<double>* grad) {
  const size_t d = packed.size() - 1;
  if (grad) grad->assign(packed.size(), 0.0);
  double loss = 0.0;
  for (size_t i = 0; i < X.size(); ++i) {
    double z = packed[d];
    for (size_t j = 0; j < d; ++j) z += packed[j] * X[i][j];
    double margin = static_cast<double>(sign[i]) * z;
    if (margin < 1.0) {
      loss += 1.0 - margin;
      if (grad) {
        for (size_t j = 0; j < d; ++j) (*grad)[j] -= static_cast<double>(sign[i]) * X[i][j];
        (*grad)[d] -= static_cast<double>(sign[i]);
      }
    }
  }
  for (size_t j = 0; j < d; ++j) loss += 0.5 * lambda * packed[j] * packed[j];
  if (grad)
    for (size_t j = 0; j < d; ++j) (*grad)[j] += lambda * packed[j];
  return loss;
}

}  // namespace ordinal

struct BaselineTrainConfig {
  std::uint64_t seed = 1;
  double svm_lambda = 1.0;  // L2 strength (1/C)
  bool standardize = true;
  ordinal::GdOptions gd{.max_iters = 1000, .tol = 1e-6, .armijo_c = 1e-6, .max_backtracks = 40};
};

inline BaselineModel fit_baseline(BaselineKind kind, const std::vector<int>& y,
                                  const std::vector<std::vector<double>>* X = nullptr,
                                  const BaselineTrainConfig& cfg = {}) {
  if (y.empty()) throw std::invalid_argument("fit_baseline: empty training labels");
  for (int label : y)
    if (label < 1 || label > 5) throw std::invalid_argument("fit_baseline: label out of range");
  BaselineModel m;
  m.kind = kind;
  std::array<long long, 5> counts{};
  double sum = 0.0;
  for (int label : y) {
    ++counts[static_cast<size_t>(label - 1)];
    sum += label;
  }
  switch (kind) {
    case BaselineKind::most_frequent: {
      int best = 1;
      for (int k = 2; k <= 5; ++k)
        if (counts[static_cast<size_t>(k - 1)] > counts[static_cast<size_t>(best - 1)]) best = k;
      m.constant = best;  // scanning upward keeps the lower label on ties
      break;
    }
    case BaselineKind::rounded_average: {
      m.constant = static_cast<int>(std::floor(sum / static_cast<double>(y.size()) + 0.5));
      break;
    }
    case BaselineKind::freq_sampling: {
      for (size_t k = 0; k < 5; ++k)
        m.distribution[k] = static_cast<double>(counts[k]) / static_cast<double>(y.size());
      m.seed = cfg.seed;
      m.rng_state = cfg.seed;
      break;
    }
    case BaselineKind::one_vs_all_svm: {
      if (!X) throw std::invalid_argument("fit_baseline: SVM needs feature matrix");
      if (X->size() != y.size()) throw std::invalid_argument("fit_baseline: X/y size mismatch");
      std::vector<std::vector<double>> Z = *X;
      if (cfg.standardize) {
        m.scaler = Standardizer::fit(*X);
        for (auto& row : Z) row = m.scaler.apply(row);
      }
      const size_t d = Z[0].size();
      for (int k = 1; k <= 5; ++k) {
        std::vector<int> sign(y.size());
        for (size_t i = 0; i < y.size(); ++i) sign[i] = y[i] == k ? 1 : -1;
        std::vector<double> packed(d + 1, 0.0);
        ordinal::minimize(packed, cfg.gd, [&](const std::vector<double>& p, std::vector<double>* g) {
          return ordinal::svm_loss_grad(p, Z, sign, cfg.svm_lambda, g);
        });
        m.svm_weights[static_cast<size_t>(k - 1)].assign(packed.begin(),
                                                         packed.begin() + static_cast<long>(d));
        m.svm_bias[static_cast<size_t>(k - 1)] = packed[d];
      }
      break;
    }
  }
  return m;
}

inline int predict_baseline(const BaselineModel& m, const std::vector<double>* x = nullptr) {
  switch (m.kind) {
    case BaselineKind::most_frequent:
    case BaselineKind::rounded_average:
      return m.constant;
    case BaselineKind::freq_sampling: {
      // splitmix draw -> inverse CDF; the stored state advances per call
      std::uint64_t z = (m.rng_state += 0x9e3779b97f4a7c15ULL);
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      z ^= z >> 31;
      double u = static_cast<double>(z >> 11) * 0x1.0p-53;
      double acc = 0.0;
      for (int k = 1; k <= 5; ++k) {
        acc += m.distribution[static_cast<size_t>(k - 1)];
        if (u < acc) return k;
      }
      return 5;
    }
    case BaselineKind::one_vs_all_svm: {
      if (!x) throw std::invalid_argument("predict_baseline: SVM needs features");
      std::vector<double> z = m.scaler.apply(*x);
      int best = 1;
      double best_margin = -std::numeric_limits<double>::infinity();
      for (int k = 1; k <= 5; ++k) {
        double margin = m.svm_bias[static_cast<size_t>(k - 1)];
        const auto& w = m.svm_weights[static_cast<size_t>(k - 1)];
        for (size_t j = 0; j < w.size(); ++j) margin += w[j] * z[j];
        if (margin > best_margin) {  // strict: ties keep the lower label
          best_margin = margin;
          best = k;
        }
      }
      return best;
    }
  }
  return 3;
}

inline void save_ordinal_model(const std::string& path, const OrdinalModel& m,
                               const std::vector<std::string>& feature_names_used,
                               std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["loss_variant"] = loss_variant_name(m.variant);
  j["lambda"] = m.lambda;
  j["seed"] = seed;
  j["feature_names"] = feature_names_used;
  j["weights"] = m.weights;
  j["thresholds"] = m.thresholds;
  j["standardizer"]["mean"] = m.scaler.mean;
  j["standardizer"]["stdev"] = m.scaler.stdev;
  j["degenerate"] = m.degenerate;
  j["degenerate_class"] = m.degenerate_class;
  atomic_write(path, j.dump(2) + "\n");
}

inline OrdinalModel load_ordinal_model(const std::string& path,
                                       std::vector<std::string>* feature_names_used = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError(path + ": malformed model file");
  OrdinalModel m;
  m.variant = loss_variant_from_name(j.at("loss_variant").get<std::string>());
  m.lambda = j.at("lambda").get<double>();
  m.weights = j.at("weights").get<std::vector<double>>();
  auto th = j.at("thresholds").get<std::vector<double>>();
  if (th.size() != 4) throw ParseError(path + ": expected 4 thresholds");
  for (size_t k = 0; k < 4; ++k) m.thresholds[k] = th[k];
  m.scaler.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
  m.scaler.stdev = j.at("standardizer").at("stdev").get<std::vector<double>>();
  m.degenerate = j.value("degenerate", false);
  m.degenerate_class = j.value("degenerate_class", 0);
  if (feature_names_used && j.contains("feature_names"))
    *feature_names_used = j.at("feature_names").get<std::vector<std::string>>();
  return m;
}

}  // namespace joci
