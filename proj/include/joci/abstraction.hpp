#pragma once

// Step (b): reduce propositions to lemma-level, at most two argument slots,
// attach first senses, and turn the result into one-placeholder templates
// anchored at below-cut senses. The template store counts (sense, pattern)
// occurrences and supports merge and frequency pruning.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "joci/extraction.hpp"
#include "joci/taxonomy.hpp"

namespace joci {

constexpr const char* kPlaceholder = "____";

struct AbstractedSlot {
  Role role = Role::subj;
  std::string prep;  // obl case marker
  std::string lemma;
  std::optional<SenseId> sense;

  bool operator==(const AbstractedSlot&) const = default;
};

struct AbstractedProposition {
  std::string predicate_lemma;
  std::vector<AbstractedSlot> slots;  // 1..2
  // Oblique slots dropped during 3->2 reduction survive as fixed pattern
  // text ("... from library"), no longer eligible as placeholder anchors.
  std::vector<std::pair<std::string, std::string>> adjuncts;  // (prep, lemma)
  bool negated = false;

  bool operator==(const AbstractedProposition&) const = default;
};

// Argument phrases collapse to their head lemma; slots are cut to two by
// dropping obl first (retained as adjunct text), then iobj.
inline std::optional<AbstractedProposition> abstract_proposition(const Proposition& prop,
                                                                 const Taxonomy& tax) {
  AbstractedProposition out;
  out.predicate_lemma = to_lower(prop.predicate_lemma);
  out.negated = prop.negated;

  std::vector<AbstractedSlot> slots;
  for (const ArgSlot& s : prop.arg_slots) {
    AbstractedSlot a;
    a.role = s.role;
    a.prep = s.prep;
    a.lemma = to_lower(s.head_lemma);
    slots.push_back(std::move(a));
  }
  while (slots.size() > 2) {
    auto obl = std::find_if(slots.rbegin(), slots.rend(),
                            [](const AbstractedSlot& s) { return s.role == Role::obl; });
    if (obl != slots.rend()) {
      out.adjuncts.emplace_back(obl->prep, obl->lemma);
      slots.erase(std::next(obl).base());
      continue;
    }
    auto iobj = std::find_if(slots.rbegin(), slots.rend(),
                             [](const AbstractedSlot& s) { return s.role == Role::iobj; });
    if (iobj != slots.rend()) {
      slots.erase(std::next(iobj).base());
      continue;
    }
    return std::nullopt;
  }
  std::reverse(out.adjuncts.begin(), out.adjuncts.end());
  if (slots.empty()) return std::nullopt;

  for (AbstractedSlot& s : slots) s.sense = tax.first_sense(s.lemma);
  out.slots = std::move(slots);
  return out;
}

namespace detail {

inline std::vector<std::string> slot_words(const AbstractedSlot& s, bool placeholder) {
  std::vector<std::string> words;
  if (s.role == Role::iobj)
    words.push_back("to");
  else if (s.role == Role::obl && !s.prep.empty())
    words.push_back(s.prep);
  words.push_back(placeholder ? kPlaceholder : s.lemma);
  return words;
}

}  // namespace detail

// Lemma-order rendering: subj predicate [obj] [to iobj] [prep obl] adjuncts.
inline std::string render_pattern(const AbstractedProposition& aprop, int placeholder_slot) {
  std::vector<std::string> words;
  auto emit = [&](const AbstractedSlot& s, int idx) {
    for (auto& w : detail::slot_words(s, idx == placeholder_slot)) words.push_back(w);
  };
  int subj = -1;
  for (size_t i = 0; i < aprop.slots.size(); ++i)
    if (aprop.slots[i].role == Role::subj) subj = static_cast<int>(i);
  if (subj >= 0) emit(aprop.slots[static_cast<size_t>(subj)], subj);
  words.push_back(aprop.predicate_lemma);
  for (size_t i = 0; i < aprop.slots.size(); ++i)
    if (static_cast<int>(i) != subj) emit(aprop.slots[i], static_cast<int>(i));
  for (const auto& [prep, lemma] : aprop.adjuncts) {
    if (!prep.empty()) words.push_back(prep);
    words.push_back(lemma);
  }
  return join(words, " ");
}

struct Template {
  SenseId anchor_sense;
  std::string pattern;  // exactly one placeholder occurrence

  bool operator==(const Template&) const = default;
  auto operator<=>(const Template&) const = default;
};

// One template per slot whose sense passes the taxonomy cut. Negated
// propositions yield nothing; the templates state positive presumptions.
inline std::vector<Template> make_templates(const AbstractedProposition& aprop,
                                            const Taxonomy& tax) {
  std::vector<Template> out;
  if (aprop.negated) return out;
  for (size_t i = 0; i < aprop.slots.size(); ++i) {
    const AbstractedSlot& s = aprop.slots[i];
    if (!s.sense || !tax.contains(*s.sense) || !tax.below_cut(*s.sense)) continue;
    out.push_back(Template{*s.sense, render_pattern(aprop, static_cast<int>(i))});
  }
  return out;
}

class TemplateStore {
 public:
  using PatternCounts = std::map<std::string, long long>;

  void add(const Template& t, long long count = 1) {
    by_sense_[t.anchor_sense][t.pattern] += count;
  }

  void add(const std::vector<Template>& templates) {
    for (const Template& t : templates) add(t);
  }

  // Counts summed; merging partial stores from parallel workers.
  void merge(const TemplateStore& other) {
    for (const auto& [sense, patterns] : other.by_sense_)
      for (const auto& [pattern, count] : patterns) by_sense_[sense][pattern] += count;
  }

  long long count(const SenseId& sense, const std::string& pattern) const {
    auto it = by_sense_.find(sense);
    if (it == by_sense_.end()) return 0;
    auto pit = it->second.find(pattern);
    return pit == it->second.end() ? 0 : pit->second;
  }

  const PatternCounts* patterns(const SenseId& sense) const {
    auto it = by_sense_.find(sense);
    return it == by_sense_.end() ? nullptr : &it->second;
  }

  size_t total_templates() const {
    size_t n = 0;
    for (const auto& [_, patterns] : by_sense_) n += patterns.size();
    return n;
  }

  const std::map<SenseId, PatternCounts>& by_sense() const { return by_sense_; }

  bool operator==(const TemplateStore&) const = default;

 private:
  std::map<SenseId, PatternCounts> by_sense_;
};

inline TemplateStore store_prune(const TemplateStore& store, long long min_count = 2) {
  TemplateStore out;
  for (const auto& [sense, patterns] : store.by_sense())
    for (const auto& [pattern, count] : patterns)
      if (count >= min_count) out.add(Template{sense, pattern}, count);
  return out;
}

// TSV: sense <tab> pattern <tab> count
inline void save_store(const std::string& path, const TemplateStore& store) {
  std::string buf;
  for (const auto& [sense, patterns] : store.by_sense())
    for (const auto& [pattern, count] : patterns)
      buf += sense.str() + "\t" + pattern + "\t" + std::to_string(count) + "\n";
  atomic_write(path, buf);
}

inline TemplateStore load_store(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  TemplateStore store;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cols = split(line, '\t');
    if (cols.size() != 3)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected 3 tab-separated fields");
    store.add(Template{SenseId::parse(cols[0]), cols[1]}, std::stoll(cols[2]));
  }
  return store;
}

}  // namespace joci
