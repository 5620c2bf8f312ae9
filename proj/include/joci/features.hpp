#pragma once

// Feature families over context-hypothesis pairs: bag-of-words overlap,
// embedding similarity, sequence-model log-probabilities with their argmin
// indicators, and length features. Unavailable inputs zero the family and
// set its mask.

#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "joci/corpus_io.hpp"
#include "joci/text.hpp"

namespace joci {

enum class FeatureFamily { bow = 0, sim = 1, s2s = 2, s2s_bin = 3, len = 4 };

constexpr size_t kNumFeatures = 17;

inline const std::array<std::string, kNumFeatures>& feature_names() {
  static const std::array<std::string, kNumFeatures> kNames{
      "bow_overlap",  "bow_overlap_norm", "sim_of_avg",   "avg_of_sim",  "s2s_ent",
      "s2s_neu",      "s2s_con",          "s2s_neu_con",  "s2s_empty",   "s2sbin_ent",
      "s2sbin_neu",   "s2sbin_con",       "s2sbin_neu_con", "s2sbin_empty", "len_context",
      "len_diff",     "len_h_longer"};
  return kNames;
}

inline std::pair<size_t, size_t> family_columns(FeatureFamily f) {
  switch (f) {
    case FeatureFamily::bow: return {0, 2};
    case FeatureFamily::sim: return {2, 4};
    case FeatureFamily::s2s: return {4, 9};
    case FeatureFamily::s2s_bin: return {9, 14};
    case FeatureFamily::len: return {14, 17};
  }
  return {0, 0};
}

struct FeatureVector {
  std::array<double, kNumFeatures> values{};
  std::array<bool, 5> family_masked{};  // indexed by FeatureFamily

  bool operator==(const FeatureVector&) const = default;
};

struct BowFeatures {
  long long overlap = 0;
  double overlap_norm = 0.0;
};

// Type overlap of the two word sets; the norm divides by H's token count.
inline BowFeatures bow_features(const std::string& context, const std::string& hypothesis) {
  std::vector<std::string> c_tokens = tokenize_words(context);
  std::vector<std::string> h_tokens = tokenize_words(hypothesis);
  std::set<std::string> c_set(c_tokens.begin(), c_tokens.end());
  std::set<std::string> h_set(h_tokens.begin(), h_tokens.end());
  BowFeatures out;
  for (const std::string& w : h_set)
    if (c_set.count(w)) ++out.overlap;
  out.overlap_norm =
      h_tokens.empty() ? 0.0 : static_cast<double>(out.overlap) / static_cast<double>(h_tokens.size());
  return out;
}

struct SimFeatures {
  double sim_of_avg = 0.0;
  double avg_of_sim = 0.0;
  bool masked = false;  // a side was all-OOV or had a zero-norm sum
};

namespace detail {

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline std::vector<const std::vector<double>*> in_vocab_vectors(const std::string& text,
                                                                const EmbeddingTable& emb) {
  std::vector<const std::vector<double>*> out;
  for (const std::string& tok : tokenize_words(text))
    if (const auto* v = emb.lookup(tok)) out.push_back(v);
  return out;
}

}  // namespace detail

inline SimFeatures sim_features(const std::string& context, const std::string& hypothesis,
                                const EmbeddingTable& emb) {
  SimFeatures out;
  auto c_vecs = detail::in_vocab_vectors(context, emb);
  auto h_vecs = detail::in_vocab_vectors(hypothesis, emb);
  if (c_vecs.empty() || h_vecs.empty()) {
    out.masked = true;
    return out;
  }
  std::vector<double> c_sum(static_cast<size_t>(emb.dimension), 0.0);
  std::vector<double> h_sum(static_cast<size_t>(emb.dimension), 0.0);
  for (const auto* v : c_vecs)
    for (size_t i = 0; i < v->size(); ++i) c_sum[i] += (*v)[i];
  for (const auto* v : h_vecs)
    for (size_t i = 0; i < v->size(); ++i) h_sum[i] += (*v)[i];
  auto norm = [](const std::vector<double>& v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    return n;
  };
  if (norm(c_sum) == 0.0 || norm(h_sum) == 0.0) {
    out.masked = true;
    return out;
  }
  out.sim_of_avg = detail::cosine(c_sum, h_sum);
  double total = 0.0;
  for (const auto* cv : c_vecs)
    for (const auto* hv : h_vecs) total += detail::cosine(*cv, *hv);
  out.avg_of_sim = total / (static_cast<double>(c_vecs.size()) * static_cast<double>(h_vecs.size()));
  return out;
}

// Indicator at the argmin of the five variant scores; ties pick the lowest
// variant index.
inline std::array<double, 5> s2s_bin(const std::array<double, 5>& scores) {
  std::array<double, 5> out{};
  size_t argmin = 0;
  for (size_t i = 1; i < scores.size(); ++i)
    if (scores[i] < scores[argmin]) argmin = i;
  out[argmin] = 1.0;
  return out;
}

struct LenFeatures {
  long long len_context = 0;
  long long len_diff = 0;
  int h_longer = 0;
};

inline LenFeatures len_features(const std::string& context, const std::string& hypothesis) {
  long long c = static_cast<long long>(tokenize_words(context).size());
  long long h = static_cast<long long>(tokenize_words(hypothesis).size());
  return {c, c - h, h > c ? 1 : 0};
}

// Assembles the full 17-feature vector. Pass nullptr for unavailable
// inputs; the corresponding families are zeroed and masked.
inline FeatureVector featurize_pair(const std::string& context, const std::string& hypothesis,
                                    const EmbeddingTable* emb,
                                    const std::optional<std::array<double, 5>>& s2s_scores) {
  FeatureVector fv;
  BowFeatures bow = bow_features(context, hypothesis);
  fv.values[0] = static_cast<double>(bow.overlap);
  fv.values[1] = bow.overlap_norm;

  if (emb && !emb->empty()) {
    SimFeatures sim = sim_features(context, hypothesis, *emb);
    fv.values[2] = sim.sim_of_avg;
    fv.values[3] = sim.avg_of_sim;
    fv.family_masked[static_cast<size_t>(FeatureFamily::sim)] = sim.masked;
  } else {
    fv.family_masked[static_cast<size_t>(FeatureFamily::sim)] = true;
  }

  if (s2s_scores) {
    for (size_t i = 0; i < 5; ++i) fv.values[4 + i] = (*s2s_scores)[i];
    std::array<double, 5> bin = s2s_bin(*s2s_scores);
    for (size_t i = 0; i < 5; ++i) fv.values[9 + i] = bin[i];
  } else {
    fv.family_masked[static_cast<size_t>(FeatureFamily::s2s)] = true;
    fv.family_masked[static_cast<size_t>(FeatureFamily::s2s_bin)] = true;
  }

  LenFeatures len = len_features(context, hypothesis);
  fv.values[14] = static_cast<double>(len.len_context);
  fv.values[15] = static_cast<double>(len.len_diff);
  fv.values[16] = static_cast<double>(len.h_longer);
  return fv;
}

}  // namespace joci
