#pragma once

// Metrics and the experiment harness: mean squared error, Spearman's rho
// with a seeded permutation test, the regression-vs-baselines comparison,
// and the feature-family ablation grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "joci/features.hpp"
#include "joci/ordinal_model.hpp"

namespace joci {

inline double mse(const std::vector<int>& pred, const std::vector<int>& gold) {
  if (pred.size() != gold.size()) throw std::invalid_argument("mse: length mismatch");
  if (pred.empty()) throw std::invalid_argument("mse: empty sequences");
  double total = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    double d = static_cast<double>(pred[i] - gold[i]);
    total += d * d;
  }
  return total / static_cast<double>(pred.size());
}

namespace detail {

// Average ranks, ties share the mean rank.
inline std::vector<double> average_ranks(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

inline std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;
  bool flagged_zero = false;  // a constant side forced rho to 0
};

// Spearman's rho with average ranks; two-sided permutation test for
// rho = 0 (add-one estimator). Pass num_permutations = 0 to skip the test.
inline SpearmanResult spearman(const std::vector<double>& pred, const std::vector<double>& gold,
                               int num_permutations = 10000, std::uint64_t seed = 2025) {
  if (pred.size() != gold.size()) throw std::invalid_argument("spearman: length mismatch");
  if (pred.size() < 3) throw std::invalid_argument("spearman: need at least 3 points");
  SpearmanResult out;
  bool const_a = std::all_of(pred.begin(), pred.end(), [&](double v) { return v == pred[0]; });
  bool const_b = std::all_of(gold.begin(), gold.end(), [&](double v) { return v == gold[0]; });
  if (const_a || const_b) {
    out.rho = 0.0;
    out.p_value = 1.0;
    out.flagged_zero = true;
    return out;
  }
  std::vector<double> ra = detail::average_ranks(pred);
  std::vector<double> rb = detail::average_ranks(gold);
  out.rho = detail::pearson(ra, rb);
  if (num_permutations <= 0) return out;

  std::uint64_t state = seed;
  std::vector<double> shuffled = rb;
  long long at_least = 0;
  const double target = std::abs(out.rho) - 1e-12;
  for (int p = 0; p < num_permutations; ++p) {
    for (size_t i = shuffled.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(detail::splitmix(state) % i);
      std::swap(shuffled[i - 1], shuffled[j]);
    }
    if (std::abs(detail::pearson(ra, shuffled)) >= target) ++at_least;
  }
  out.p_value = static_cast<double>(at_least + 1) / static_cast<double>(num_permutations + 1);
  return out;
}

inline SpearmanResult spearman(const std::vector<int>& pred, const std::vector<int>& gold,
                               int num_permutations = 10000, std::uint64_t seed = 2025) {
  return spearman(std::vector<double>(pred.begin(), pred.end()),
                  std::vector<double>(gold.begin(), gold.end()), num_permutations, seed);
}

struct EvalRow {
  std::string model;
  std::string split;
  size_t n = 0;
  double mse = 0.0;
  double rho = 0.0;
  double p_value = 1.0;
  bool rho_flagged = false;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::uint64_t seed = 0;

  std::string to_tsv() const {
    std::ostringstream out;
    out << "model\tsplit\tn\tmse\trho\tp_value\trho_flagged\n";
    for (const EvalRow& r : rows) {
      out << r.model << '\t' << r.split << '\t' << r.n << '\t' << r.mse << '\t' << r.rho << '\t'
          << r.p_value << '\t' << (r.rho_flagged ? 1 : 0) << '\n';
    }
    return out.str();
  }

  std::string to_text() const {
    std::ostringstream out;
    out << "model                 split    n      MSE      rho     p\n";
    for (const EvalRow& r : rows) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%-21s %-8s %-6zu %-8.3f %-7.3f %.4f%s\n", r.model.c_str(),
                    r.split.c_str(), r.n, r.mse, r.rho, r.p_value, r.rho_flagged ? " (const)" : "");
      out << buf;
    }
    return out.str();
  }
};

struct Dataset {
  std::vector<std::vector<double>> X;
  std::vector<int> y;
};

struct ExperimentConfig {
  OrdinalTrainConfig ordinal;
  BaselineTrainConfig baseline;
  std::uint64_t seed = 1;
  int permutations = 10000;
};

namespace detail {

inline EvalRow eval_predictions(const std::string& model, const std::string& split,
                                const std::vector<int>& pred, const std::vector<int>& gold,
                                int permutations, std::uint64_t seed) {
  EvalRow row;
  row.model = model;
  row.split = split;
  row.n = gold.size();
  row.mse = mse(pred, gold);
  SpearmanResult s = spearman(pred, gold, permutations, seed);
  row.rho = s.rho;
  row.p_value = s.p_value;
  row.rho_flagged = s.flagged_zero;
  return row;
}

}  // namespace detail

// Trains the regression model and all four baselines; reports MSE and rho
// on train and test.
inline EvalReport run_experiment(const Dataset& train, const Dataset& test,
                                 const ExperimentConfig& cfg = {}) {
  ExperimentConfig c = cfg;
  c.baseline.seed = cfg.seed;
  EvalReport report;
  report.seed = cfg.seed;

  auto evaluate_model = [&](const std::string& name, auto&& predict) {
    std::vector<int> pred_train, pred_test;
    for (const auto& x : train.X) pred_train.push_back(predict(x));
    for (const auto& x : test.X) pred_test.push_back(predict(x));
    report.rows.push_back(detail::eval_predictions(name, "train", pred_train, train.y,
                                                   c.permutations, cfg.seed));
    report.rows.push_back(
        detail::eval_predictions(name, "test", pred_test, test.y, c.permutations, cfg.seed));
  };

  OrdinalModel reg = train_ordinal(train.X, train.y, c.ordinal);
  evaluate_model("Regression", [&](const std::vector<double>& x) { return predict_ordinal(reg, x); });

  for (BaselineKind kind : {BaselineKind::most_frequent, BaselineKind::freq_sampling,
                            BaselineKind::rounded_average, BaselineKind::one_vs_all_svm}) {
    BaselineModel base = fit_baseline(kind, train.y, &train.X, c.baseline);
    evaluate_model(baseline_name(kind),
                   [&](const std::vector<double>& x) { return predict_baseline(base, &x); });
  }
  return report;
}

inline const std::vector<std::pair<std::string, std::vector<FeatureFamily>>>& ablation_rows() {
  using F = FeatureFamily;
  static const std::vector<std::pair<std::string, std::vector<F>>> kRows = {
      {"all", {F::bow, F::sim, F::s2s, F::s2s_bin, F::len}},
      {"all - {sim}", {F::bow, F::s2s, F::s2s_bin, F::len}},
      {"all - {bow}", {F::sim, F::s2s, F::s2s_bin, F::len}},
      {"all - {sim,bow}", {F::s2s, F::s2s_bin, F::len}},
      {"all - {s2s}", {F::bow, F::sim, F::s2s_bin, F::len}},
      {"all - {s2s-bin}", {F::bow, F::sim, F::s2s, F::len}},
      {"all - {s2s,s2s-bin}", {F::bow, F::sim, F::len}},
      {"all - {len}", {F::bow, F::sim, F::s2s, F::s2s_bin}},
      {"0 + {sim}", {F::sim}},
      {"0 + {bow}", {F::bow}},
      {"0 + {s2s}", {F::s2s}},
      {"0 + {s2s-bin}", {F::s2s_bin}},
      {"0 + {len}", {F::len}},
  };
  return kRows;
}

inline std::vector<std::vector<double>> project_families(
    const std::vector<std::vector<double>>& X, const std::vector<FeatureFamily>& families) {
  std::vector<std::pair<size_t, size_t>> ranges;
  for (FeatureFamily f : families) ranges.push_back(family_columns(f));
  std::sort(ranges.begin(), ranges.end());
  std::vector<std::vector<double>> out;
  out.reserve(X.size());
  for (const auto& row : X) {
    std::vector<double> projected;
    for (auto [lo, hi] : ranges)
      for (size_t c = lo; c < hi; ++c) projected.push_back(row[c]);
    out.push_back(std::move(projected));
  }
  return out;
}

// The ablation grid: all, all-minus-one per family, the two paired
// removals, and each family alone.
inline EvalReport ablation(const Dataset& train, const Dataset& test,
                           const ExperimentConfig& cfg = {},
                           const std::vector<FeatureFamily>& families = {
                               FeatureFamily::bow, FeatureFamily::sim, FeatureFamily::s2s,
                               FeatureFamily::s2s_bin, FeatureFamily::len}) {
  EvalReport report;
  report.seed = cfg.seed;
  for (const auto& [name, row_families] : ablation_rows()) {
    std::vector<FeatureFamily> used;
    for (FeatureFamily f : row_families)
      if (std::find(families.begin(), families.end(), f) != families.end()) used.push_back(f);
    if (used.empty()) continue;  // empty feature-set row is skipped
    Dataset tr{project_families(train.X, used), train.y};
    Dataset te{project_families(test.X, used), test.y};
    OrdinalModel model = train_ordinal(tr.X, tr.y, cfg.ordinal);
    std::vector<int> pred_train, pred_test;
    for (const auto& x : tr.X) pred_train.push_back(predict_ordinal(model, x));
    for (const auto& x : te.X) pred_test.push_back(predict_ordinal(model, x));
    report.rows.push_back(detail::eval_predictions(name, "train", pred_train, tr.y,
                                                   cfg.permutations, cfg.seed));
    report.rows.push_back(
        detail::eval_predictions(name, "test", pred_test, te.y, cfg.permutations, cfg.seed));
  }
  return report;
}

}  // namespace joci
