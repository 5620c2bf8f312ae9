#pragma once

// The 5-point ordinal label system and its aggregation mechanics: NA
// filtering, median gold labels, quadratic weighted kappa, worker
// qualification, agreement growth curves, and label distributions.

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "joci/corpus_io.hpp"

namespace joci {

inline const char* ordinal_name(int value) {
  switch (value) {
    case 1: return "impossible";
    case 2: return "technically possible";
    case 3: return "plausible";
    case 4: return "likely";
    case 5: return "very likely";
  }
  throw std::invalid_argument("ordinal value out of range: " + std::to_string(value));
}

inline int ordinal_from_name(const std::string& name) {
  for (int v = 1; v <= 5; ++v)
    if (name == ordinal_name(v)) return v;
  throw std::invalid_argument("unknown ordinal label: " + name);
}

enum class NaPolicy { any, majority };

struct FilterResult {
  std::vector<PairRecord> kept;
  size_t dropped = 0;
};

// Default policy drops a pair if any annotator marked it NA.
inline FilterResult filter_na(const std::vector<PairRecord>& records,
                              NaPolicy policy = NaPolicy::any) {
  FilterResult out;
  for (const PairRecord& r : records) {
    size_t na = 0;
    for (int a : r.annotations)
      if (a == kNA) ++na;
    bool drop = policy == NaPolicy::any ? na > 0 : 2 * na > r.annotations.size();
    if (drop)
      ++out.dropped;
    else
      out.kept.push_back(r);
  }
  return out;
}

// Lower median: even-length lists take the element at index n/2 - 1, so the
// result is always one of the given labels.
inline int aggregate_median(std::vector<int> labels) {
  if (labels.empty()) throw std::invalid_argument("aggregate_median: empty label list");
  for (int l : labels)
    if (l < 1 || l > 5) throw std::invalid_argument("aggregate_median: label out of range");
  std::sort(labels.begin(), labels.end());
  size_t idx = labels.size() % 2 == 1 ? labels.size() / 2 : labels.size() / 2 - 1;
  return labels[idx];
}

struct QwkResult {
  double kappa = 0.0;
  bool degenerate = false;  // zero expected disagreement with observed disagreement
};

// Quadratic weighted Cohen's kappa on labels 1..K.
inline QwkResult qwk(const std::vector<int>& a, const std::vector<int>& b, int num_classes = 5) {
  if (a.size() != b.size()) throw std::invalid_argument("qwk: length mismatch");
  if (a.empty()) throw std::invalid_argument("qwk: empty sequences");
  const int K = num_classes;
  const double n = static_cast<double>(a.size());
  std::vector<std::vector<double>> observed(static_cast<size_t>(K),
                                            std::vector<double>(static_cast<size_t>(K), 0.0));
  std::vector<double> marg_a(static_cast<size_t>(K), 0.0), marg_b(static_cast<size_t>(K), 0.0);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 1 || a[i] > K || b[i] < 1 || b[i] > K)
      throw std::invalid_argument("qwk: label out of range");
    observed[static_cast<size_t>(a[i] - 1)][static_cast<size_t>(b[i] - 1)] += 1.0 / n;
    marg_a[static_cast<size_t>(a[i] - 1)] += 1.0 / n;
    marg_b[static_cast<size_t>(b[i] - 1)] += 1.0 / n;
  }
  double denom = static_cast<double>((K - 1) * (K - 1));
  double wo = 0.0, we = 0.0;
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) {
      double w = static_cast<double>((i - j) * (i - j)) / denom;
      wo += w * observed[static_cast<size_t>(i)][static_cast<size_t>(j)];
      we += w * marg_a[static_cast<size_t>(i)] * marg_b[static_cast<size_t>(j)];
    }
  if (we == 0.0) {
    // both raters constant; agreement is perfect or undefined
    if (wo == 0.0) return {1.0, false};
    return {0.0, true};
  }
  return {1.0 - wo / we, false};
}

// worker id -> (item id -> label); NA-filtered upstream
using WorkerLabels = std::map<std::string, std::map<std::string, int>>;

namespace detail {

inline std::optional<double> pair_kappa(const std::map<std::string, int>& x,
                                        const std::map<std::string, int>& y) {
  std::vector<int> xs, ys;
  for (const auto& [item, label] : x) {
    auto it = y.find(item);
    if (it == y.end()) continue;
    xs.push_back(label);
    ys.push_back(it->second);
  }
  if (xs.empty()) return std::nullopt;
  return qwk(xs, ys).kappa;
}

}  // namespace detail

// Mean qwk per worker against every other worker with overlapping items.
// Workers with no overlap at all are reported in no_overlap.
struct WorkerAgreement {
  std::map<std::string, double> average;  // workers with >= 1 comparable peer
  std::vector<std::string> no_overlap;
};

inline WorkerAgreement per_worker_kappa(const WorkerLabels& workers) {
  WorkerAgreement out;
  for (const auto& [w, labels] : workers) {
    double sum = 0.0;
    int count = 0;
    for (const auto& [other, other_labels] : workers) {
      if (other == w) continue;
      auto k = detail::pair_kappa(labels, other_labels);
      if (!k) continue;
      sum += *k;
      ++count;
    }
    if (count == 0)
      out.no_overlap.push_back(w);
    else
      out.average[w] = sum / count;
  }
  return out;
}

// Mean qwk over all unordered worker pairs with overlap.
inline double avg_pairwise_kappa(const WorkerLabels& workers) {
  if (workers.size() < 2) throw std::invalid_argument("avg_pairwise_kappa: need >= 2 workers");
  double sum = 0.0;
  int count = 0;
  for (auto it = workers.begin(); it != workers.end(); ++it)
    for (auto jt = std::next(it); jt != workers.end(); ++jt) {
      auto k = detail::pair_kappa(it->second, jt->second);
      if (!k) continue;
      sum += *k;
      ++count;
    }
  if (count == 0) throw std::invalid_argument("avg_pairwise_kappa: no overlapping items");
  return sum / count;
}

inline std::set<std::string> qualify_workers(const WorkerLabels& pilot, double threshold = 0.7) {
  std::set<std::string> qualified;
  for (const auto& [worker, avg] : per_worker_kappa(pilot).average)
    if (avg >= threshold) qualified.insert(worker);
  return qualified;
}

// Retained-pair counts as the per-pair agreement threshold rises.
inline std::vector<std::pair<double, size_t>> kappa_growth_curve(
    const std::vector<double>& pair_kappas, const std::vector<double>& thresholds) {
  std::vector<std::pair<double, size_t>> out;
  for (double t : thresholds) {
    size_t kept = 0;
    for (double k : pair_kappas)
      if (k >= t) ++kept;
    out.emplace_back(t, kept);
  }
  return out;
}

struct DistributionResult {
  std::array<double, 5> values{};
  size_t skipped = 0;  // records without a gold label
};

inline DistributionResult label_distribution(const std::vector<PairRecord>& records,
                                             bool normalize) {
  DistributionResult out;
  double total = 0.0;
  for (const PairRecord& r : records) {
    if (!r.gold) {
      ++out.skipped;
      continue;
    }
    out.values[static_cast<size_t>(*r.gold - 1)] += 1.0;
    total += 1.0;
  }
  if (normalize && total > 0.0)
    for (double& v : out.values) v /= total;
  return out;
}

// Joint gold-label counts over aligned record series, indexed
// [label of series 0 - 1][label of series 1 - 1].
inline std::array<std::array<double, 5>, 5> joint_distribution(
    const std::vector<PairRecord>& series0, const std::vector<PairRecord>& series1,
    size_t* skipped = nullptr) {
  if (series0.size() != series1.size())
    throw std::invalid_argument("joint_distribution: series length mismatch");
  std::array<std::array<double, 5>, 5> joint{};
  size_t skip = 0;
  for (size_t i = 0; i < series0.size(); ++i) {
    if (!series0[i].gold || !series1[i].gold) {
      ++skip;
      continue;
    }
    joint[static_cast<size_t>(*series0[i].gold - 1)][static_cast<size_t>(*series1[i].gold - 1)] +=
        1.0;
  }
  if (skipped) *skipped = skip;
  return joint;
}

// Per-pair agreement proxy: mean pairwise qwk of the pair's annotators over
// their full co-annotation history.
inline std::vector<double> per_pair_kappas(const std::vector<PairRecord>& records) {
  WorkerLabels workers;
  for (size_t i = 0; i < records.size(); ++i) {
    const PairRecord& r = records[i];
    if (r.workers.size() != r.annotations.size()) continue;
    for (size_t j = 0; j < r.workers.size(); ++j)
      if (r.annotations[j] != kNA) workers[r.workers[j]]["item" + std::to_string(i)] = r.annotations[j];
  }
  std::vector<double> out;
  for (const PairRecord& r : records) {
    if (r.workers.size() != r.annotations.size() || r.workers.size() < 2) continue;
    double sum = 0.0;
    int count = 0;
    for (size_t i = 0; i < r.workers.size(); ++i)
      for (size_t j = i + 1; j < r.workers.size(); ++j) {
        auto k = detail::pair_kappa(workers[r.workers[i]], workers[r.workers[j]]);
        if (!k) continue;
        sum += *k;
        ++count;
      }
    if (count > 0) out.push_back(sum / count);
  }
  return out;
}

}  // namespace joci
