#pragma once

// Step (c): associate senses with characteristic property templates via
// three strategies. The decision tree treats each (sense, pattern)
// occurrence as a one-hot training instance and greedily splits on the
// pattern with maximal Shannon information gain. Every positive-gain
// candidate evaluated at a node is credited to the majority sense of its
// would-be present branch (so perfectly separating patterns are kept even
// when a sibling's purity ends the recursion early); per sense the top
// k_per_sense patterns by gain survive.

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "joci/abstraction.hpp"
#include "joci/taxonomy.hpp"

namespace joci {

enum class Strategy { dt, freq, isa };

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::dt: return "dt";
    case Strategy::freq: return "freq";
    case Strategy::isa: return "isa";
  }
  return "?";
}

inline Strategy strategy_from_name(const std::string& s) {
  if (s == "dt") return Strategy::dt;
  if (s == "freq") return Strategy::freq;
  if (s == "isa") return Strategy::isa;
  throw ParseError("unknown strategy: " + s);
}

struct DecisionTreeNode {
  std::optional<std::string> split_pattern;  // leaf if absent
  double gain = 0.0;
  std::map<SenseId, long long> class_counts;
  std::unique_ptr<DecisionTreeNode> present;
  std::unique_ptr<DecisionTreeNode> absent;

  bool is_leaf() const { return !split_pattern.has_value(); }
};

namespace detail {

// (sense, pattern) pair carrying its occurrence count; the instance
// multiset of a tree node.
struct DtInstanceGroup {
  SenseId sense;
  std::string pattern;
  long long count = 0;
};

inline double entropy(const std::map<SenseId, long long>& counts) {
  long long total = 0;
  for (const auto& [_, c] : counts) total += c;
  if (total == 0) return 0.0;
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

inline std::map<SenseId, long long> label_counts(const std::vector<DtInstanceGroup>& groups) {
  std::map<SenseId, long long> out;
  for (const auto& g : groups) out[g.sense] += g.count;
  return out;
}

inline double info_gain(const std::vector<DtInstanceGroup>& groups, const std::string& pattern) {
  std::map<SenseId, long long> present, absent;
  long long n_present = 0, n_absent = 0;
  for (const auto& g : groups) {
    if (g.pattern == pattern) {
      present[g.sense] += g.count;
      n_present += g.count;
    } else {
      absent[g.sense] += g.count;
      n_absent += g.count;
    }
  }
  long long n = n_present + n_absent;
  if (n == 0) return 0.0;
  double h = entropy(label_counts(groups));
  double h_split = (static_cast<double>(n_present) / n) * entropy(present) +
                   (static_cast<double>(n_absent) / n) * entropy(absent);
  return h - h_split;
}

inline SenseId majority_sense(const std::map<SenseId, long long>& counts) {
  SenseId best = counts.begin()->first;
  long long best_count = counts.begin()->second;
  for (const auto& [sense, c] : counts)
    if (c > best_count) {
      best = sense;
      best_count = c;
    }
  return best;
}

struct DtGrower {
  int max_depth;
  // (sense, pattern, gain): every positive-gain candidate seen at a node,
  // credited to the majority sense of its present branch; max gain on dupes
  std::map<std::pair<SenseId, std::string>, double> assignments;

  std::unique_ptr<DecisionTreeNode> grow(const std::vector<DtInstanceGroup>& groups, int depth) {
    auto node = std::make_unique<DecisionTreeNode>();
    node->class_counts = label_counts(groups);
    if (depth >= max_depth || node->class_counts.size() <= 1) return node;

    std::set<std::string> candidates;
    for (const auto& g : groups) candidates.insert(g.pattern);

    // candidates iterate in lexicographic order, so requiring a strict
    // improvement keeps the lexicographically smallest pattern among ties
    std::string best_pattern;
    double best_gain = 0.0;
    for (const std::string& p : candidates) {
      double gain = info_gain(groups, p);
      if (gain > best_gain + 1e-12) {
        best_gain = gain;
        best_pattern = p;
      }
      if (gain > 1e-12) {
        std::map<SenseId, long long> present_counts;
        for (const auto& g : groups)
          if (g.pattern == p) present_counts[g.sense] += g.count;
        auto key = std::make_pair(majority_sense(present_counts), p);
        auto it = assignments.find(key);
        if (it == assignments.end() || it->second < gain) assignments[key] = gain;
      }
    }
    if (best_pattern.empty() || best_gain <= 1e-12) return node;  // zero gain everywhere

    std::vector<DtInstanceGroup> present, absent;
    for (const auto& g : groups)
      (g.pattern == best_pattern ? present : absent).push_back(g);

    node->split_pattern = best_pattern;
    node->gain = best_gain;
    node->present = grow(present, depth + 1);
    node->absent = grow(absent, depth + 1);
    return node;
  }
};

}  // namespace detail

struct DtResult {
  std::unique_ptr<DecisionTreeNode> root;
  // per sense: (pattern, gain), top k_per_sense by gain, ties lexicographic
  std::map<SenseId, std::vector<std::pair<std::string, double>>> properties;
  std::vector<std::string> warnings;
};

inline DtResult derive_dt(const std::set<SenseId>& siblings, const TemplateStore& store,
                          int max_depth = 8, int k_per_sense = 10) {
  DtResult result;
  std::vector<detail::DtInstanceGroup> groups;
  for (const SenseId& s : siblings) {
    const auto* patterns = store.patterns(s);
    if (!patterns || patterns->empty()) {
      result.warnings.push_back("sense " + s.str() + " has no stored templates; skipped");
      continue;
    }
    for (const auto& [pattern, count] : *patterns)
      groups.push_back({s, pattern, count});
  }
  if (groups.empty()) return result;

  detail::DtGrower grower{max_depth, {}};
  result.root = grower.grow(groups, 0);

  std::map<SenseId, std::vector<std::pair<std::string, double>>> per_sense;
  for (auto& [key, gain] : grower.assignments) per_sense[key.first].emplace_back(key.second, gain);
  for (auto& [sense, props] : per_sense) {
    std::sort(props.begin(), props.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (static_cast<int>(props.size()) > k_per_sense) props.resize(static_cast<size_t>(k_per_sense));
    result.properties[sense] = std::move(props);
  }
  return result;
}

// Top-k patterns by count, ties lexicographic ascending.
inline std::vector<std::pair<std::string, long long>> derive_freq(const SenseId& sense,
                                                                  const TemplateStore& store,
                                                                  int k) {
  std::vector<std::pair<std::string, long long>> out;
  const auto* patterns = store.patterns(sense);
  if (!patterns || k <= 0) return out;
  out.assign(patterns->begin(), patterns->end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (static_cast<int>(out.size()) > k) out.resize(static_cast<size_t>(k));
  return out;
}

// One "____ be <parent>" per direct hypernym.
inline std::vector<std::string> derive_isa(const SenseId& sense, const Taxonomy& tax) {
  std::vector<std::string> out;
  for (const SenseId& parent : tax.hypernyms(sense))
    out.push_back(std::string(kPlaceholder) + " be " + parent.lemma);
  return out;
}

struct Property {
  std::string pattern;
  Strategy strategy = Strategy::freq;
  double score = 0.0;

  bool operator==(const Property&) const = default;
};

// per sense, sorted by score descending, ties lexicographic by pattern
using PropertyTable = std::map<SenseId, std::vector<Property>>;

struct DeriveConfig {
  bool use_dt = true;
  bool use_freq = true;
  bool use_isa = true;
  int max_depth = 8;
  int k_per_sense = 10;
};

inline PropertyTable derive_properties(const Taxonomy& tax, const TemplateStore& store,
                                       const DeriveConfig& cfg = {},
                                       std::vector<std::string>* warnings = nullptr) {
  PropertyTable table;
  auto add = [&](const SenseId& sense, const std::string& pattern, Strategy strat, double score) {
    auto& props = table[sense];
    for (Property& p : props)
      if (p.strategy == strat && p.pattern == pattern) {
        p.score = std::max(p.score, score);
        return;
      }
    props.push_back(Property{pattern, strat, score});
  };

  if (cfg.use_dt) {
    for (const SenseId& parent : tax.family_parents()) {
      std::set<SenseId> family = tax.children(parent);
      size_t with_templates = 0;
      for (const SenseId& s : family) {
        const auto* p = store.patterns(s);
        if (p && !p->empty()) ++with_templates;
      }
      if (with_templates < 2) continue;
      DtResult dt = derive_dt(family, store, cfg.max_depth, cfg.k_per_sense);
      if (warnings)
        warnings->insert(warnings->end(), dt.warnings.begin(), dt.warnings.end());
      for (const auto& [sense, props] : dt.properties)
        for (const auto& [pattern, gain] : props) add(sense, pattern, Strategy::dt, gain);
    }
  }
  if (cfg.use_freq) {
    for (const auto& [sense, _] : store.by_sense())
      for (const auto& [pattern, count] : derive_freq(sense, store, cfg.k_per_sense))
        add(sense, pattern, Strategy::freq, static_cast<double>(count));
  }
  if (cfg.use_isa) {
    for (const auto& [sense, parents] : tax.all_senses()) {
      if (parents.empty()) continue;
      for (const std::string& pattern : derive_isa(sense, tax)) add(sense, pattern, Strategy::isa, 1.0);
    }
  }

  for (auto& [_, props] : table) {
    std::sort(props.begin(), props.end(), [](const Property& a, const Property& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.pattern < b.pattern;
    });
  }
  return table;
}

// TSV: sense <tab> pattern <tab> strategy <tab> score
inline void save_properties(const std::string& path, const PropertyTable& table) {
  std::ostringstream out;
  for (const auto& [sense, props] : table)
    for (const Property& p : props)
      out << sense.str() << '\t' << p.pattern << '\t' << strategy_name(p.strategy) << '\t'
          << p.score << '\n';
  atomic_write(path, out.str());
}

inline PropertyTable load_properties(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  PropertyTable table;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cols = split(line, '\t');
    if (cols.size() != 4)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected 4 tab-separated fields");
    table[SenseId::parse(cols[0])].push_back(
        Property{cols[1], strategy_from_name(cols[2]), std::stod(cols[3])});
  }
  return table;
}

}  // namespace joci
