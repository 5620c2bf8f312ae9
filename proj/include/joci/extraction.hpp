#pragma once

// Predicate-argument extraction over Universal Dependencies trees. Three
// patterns produce propositions: verbal predicates with core/oblique
// dependents, copular predications, and adjectival modification of nouns
// (rendered as synthetic "be" predications). extract_arguments spots the
// NOUN/PROPN argument heads a context offers for hypothesis generation.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "joci/corpus_io.hpp"
#include "joci/text.hpp"

namespace joci {

enum class Role { subj, obj, iobj, obl };

inline const char* role_name(Role r) {
  switch (r) {
    case Role::subj: return "subj";
    case Role::obj: return "obj";
    case Role::iobj: return "iobj";
    case Role::obl: return "obl";
  }
  return "?";
}

inline Role role_from_name(const std::string& s) {
  if (s == "subj") return Role::subj;
  if (s == "obj") return Role::obj;
  if (s == "iobj") return Role::iobj;
  if (s == "obl") return Role::obl;
  throw ParseError("unknown role: " + s);
}

struct ArgSlot {
  Role role = Role::subj;
  std::string prep;  // case marker lemma for obl slots, else empty
  int head_index = 0;
  std::string head_lemma;
  std::pair<int, int> span{0, 0};  // inclusive token-index range of the full subtree

  bool operator==(const ArgSlot&) const = default;
};

struct Proposition {
  std::string predicate_lemma;
  int predicate_index = 0;
  std::vector<ArgSlot> arg_slots;  // 1..3, ordered subj, obj, iobj, obl...
  bool negated = false;
  std::string source_id;

  bool operator==(const Proposition&) const = default;
};

struct ArgumentSpan {
  int head_index = 0;
  std::string head_lemma;
  std::pair<int, int> span{0, 0};

  bool operator==(const ArgumentSpan&) const = default;
};

struct ExtractionConfig {
  std::set<std::string> honorifics{"mr", "mrs", "ms", "dr"};
  std::set<std::string> person_names;  // optional explicit given-name list
};

namespace detail {

inline std::string base_relation(const std::string& deprel) {
  auto pos = deprel.find(':');
  return pos == std::string::npos ? deprel : deprel.substr(0, pos);
}

inline std::optional<Role> argument_role(const std::string& deprel) {
  std::string base = base_relation(deprel);
  if (base == "nsubj") return Role::subj;
  if (base == "obj") return Role::obj;
  if (base == "iobj") return Role::iobj;
  if (base == "obl") return Role::obl;
  return std::nullopt;
}

inline std::pair<int, int> subtree_span(const DepSentence& sent,
                                        const std::vector<std::vector<int>>& children, int head,
                                        const std::set<int>& exclude = {}) {
  int lo = head, hi = head;
  std::vector<int> stack{head};
  while (!stack.empty()) {
    int cur = stack.back();
    stack.pop_back();
    lo = std::min(lo, cur);
    hi = std::max(hi, cur);
    for (int c : children[static_cast<size_t>(cur)])
      if (!exclude.count(c)) stack.push_back(c);
  }
  (void)sent;
  return {lo, hi};
}

inline std::string strip_dots(const std::string& s) {
  std::string out;
  for (char c : s)
    if (c != '.') out.push_back(c);
  return out;
}

// A PROPN head counts as a person name if its subtree carries an honorific
// (Mrs. MacReady) or the lemma is on the configured given-name list.
inline bool is_person_name(const DepSentence& sent, const std::vector<std::vector<int>>& children,
                           int head, const ExtractionConfig& cfg) {
  const Token& t = sent.at(head);
  if (t.upos != "PROPN") return false;
  if (cfg.person_names.count(to_lower(t.lemma))) return true;
  std::vector<int> stack{head};
  while (!stack.empty()) {
    int cur = stack.back();
    stack.pop_back();
    const Token& tok = sent.at(cur);
    if (cfg.honorifics.count(strip_dots(to_lower(tok.lemma))) ||
        cfg.honorifics.count(strip_dots(to_lower(tok.surface))))
      return true;
    for (int c : children[static_cast<size_t>(cur)]) stack.push_back(c);
  }
  return false;
}

inline std::string slot_lemma(const DepSentence& sent, const std::vector<std::vector<int>>& children,
                              int head, const ExtractionConfig& cfg) {
  if (is_person_name(sent, children, head, cfg)) return "person";
  return to_lower(sent.at(head).lemma);
}

inline std::string case_marker(const DepSentence& sent, const std::vector<std::vector<int>>& children,
                               int head) {
  for (int c : children[static_cast<size_t>(head)])
    if (base_relation(sent.at(c).deprel) == "case") return to_lower(sent.at(c).lemma);
  return {};
}

inline bool has_negation(const DepSentence& sent, const std::vector<std::vector<int>>& children,
                         int head) {
  for (int c : children[static_cast<size_t>(head)]) {
    const Token& t = sent.at(c);
    std::string base = base_relation(t.deprel);
    if (base != "advmod" && base != "neg") continue;
    std::string lem = to_lower(t.lemma);
    if (lem == "not" || lem == "n't") return true;
  }
  return false;
}

// Keep at most three slots, preferring subj > obj > iobj > obl; duplicate
// roles other than obl keep the first occurrence in document order.
inline std::vector<ArgSlot> arrange_slots(std::vector<ArgSlot> slots) {
  std::vector<ArgSlot> out;
  auto take_first = [&](Role r) {
    for (const ArgSlot& s : slots)
      if (s.role == r) {
        out.push_back(s);
        return;
      }
  };
  take_first(Role::subj);
  take_first(Role::obj);
  take_first(Role::iobj);
  for (const ArgSlot& s : slots) {
    if (s.role != Role::obl) continue;
    if (out.size() >= 3) break;
    out.push_back(s);
  }
  return out;
}

}  // namespace detail

inline std::vector<Proposition> extract_propositions(const DepSentence& sent,
                                                     const ExtractionConfig& cfg = {}) {
  using namespace detail;
  validate_tree(sent);
  auto children = sent.child_index();
  std::vector<Proposition> props;

  auto make_slot = [&](Role role, int dep) {
    ArgSlot slot;
    slot.role = role;
    slot.head_index = dep;
    slot.head_lemma = slot_lemma(sent, children, dep, cfg);
    slot.span = subtree_span(sent, children, dep);
    if (role == Role::obl) slot.prep = case_marker(sent, children, dep);
    return slot;
  };

  for (const Token& tok : sent.tokens) {
    // (i) verbal predicates
    if (tok.upos == "VERB") {
      std::vector<ArgSlot> slots;
      for (int dep : children[static_cast<size_t>(tok.index)]) {
        auto role = argument_role(sent.at(dep).deprel);
        if (role) slots.push_back(make_slot(*role, dep));
      }
      if (!slots.empty()) {
        Proposition p;
        p.predicate_lemma = to_lower(tok.lemma);
        p.predicate_index = tok.index;
        p.arg_slots = arrange_slots(std::move(slots));
        p.negated = has_negation(sent, children, tok.index);
        p.source_id = sent.source_id;
        props.push_back(std::move(p));
      }
      continue;
    }
    // (ii) copular predication: X is Y -> (be; subj=X; complement=Y)
    int cop = 0, subj = 0;
    for (int dep : children[static_cast<size_t>(tok.index)]) {
      std::string base = base_relation(sent.at(dep).deprel);
      if (base == "cop" && cop == 0) cop = dep;
      if (base == "nsubj" && subj == 0) subj = dep;
    }
    if (cop != 0 && subj != 0) {
      Proposition p;
      p.predicate_lemma = "be";
      p.predicate_index = cop;
      p.arg_slots.push_back(make_slot(Role::subj, subj));
      std::set<int> excluded;
      for (int dep : children[static_cast<size_t>(tok.index)]) {
        std::string base = base_relation(sent.at(dep).deprel);
        if (base == "cop" || base == "nsubj" || base == "punct" || base == "advmod" ||
            base == "aux" || base == "mark")
          excluded.insert(dep);
      }
      ArgSlot comp;
      comp.role = Role::obj;
      comp.head_index = tok.index;
      comp.head_lemma = slot_lemma(sent, children, tok.index, cfg);
      comp.span = subtree_span(sent, children, tok.index, excluded);
      p.arg_slots.push_back(std::move(comp));
      p.negated = has_negation(sent, children, tok.index);
      p.source_id = sent.source_id;
      props.push_back(std::move(p));
    }
    // (iii) adjectival modification: NOUN with amod -> (be; subj=noun; complement=adj)
    if (tok.upos == "NOUN") {
      for (int dep : children[static_cast<size_t>(tok.index)]) {
        if (base_relation(sent.at(dep).deprel) != "amod") continue;
        Proposition p;
        p.predicate_lemma = "be";
        p.predicate_index = dep;
        ArgSlot subj_slot;
        subj_slot.role = Role::subj;
        subj_slot.head_index = tok.index;
        subj_slot.head_lemma = slot_lemma(sent, children, tok.index, cfg);
        subj_slot.span = {tok.index, tok.index};
        p.arg_slots.push_back(std::move(subj_slot));
        p.arg_slots.push_back(make_slot(Role::obj, dep));
        p.source_id = sent.source_id;
        props.push_back(std::move(p));
      }
    }
  }
  return props;
}

inline nlohmann::ordered_json proposition_to_json(const Proposition& p) {
  nlohmann::ordered_json j;
  j["source_id"] = p.source_id;
  j["predicate"] = p.predicate_lemma;
  j["predicate_index"] = p.predicate_index;
  j["negated"] = p.negated;
  j["slots"] = nlohmann::json::array();
  for (const ArgSlot& s : p.arg_slots) {
    nlohmann::ordered_json js;
    js["role"] = role_name(s.role);
    if (!s.prep.empty()) js["prep"] = s.prep;
    js["head_index"] = s.head_index;
    js["lemma"] = s.head_lemma;
    js["span"] = {s.span.first, s.span.second};
    j["slots"].push_back(std::move(js));
  }
  return j;
}

inline Proposition proposition_from_json(const nlohmann::json& j) {
  Proposition p;
  p.source_id = j.at("source_id").get<std::string>();
  p.predicate_lemma = j.at("predicate").get<std::string>();
  p.predicate_index = j.at("predicate_index").get<int>();
  p.negated = j.at("negated").get<bool>();
  for (const auto& js : j.at("slots")) {
    ArgSlot s;
    s.role = role_from_name(js.at("role").get<std::string>());
    if (js.contains("prep")) s.prep = js.at("prep").get<std::string>();
    s.head_index = js.at("head_index").get<int>();
    s.head_lemma = js.at("lemma").get<std::string>();
    s.span = {js.at("span")[0].get<int>(), js.at("span")[1].get<int>()};
    p.arg_slots.push_back(std::move(s));
  }
  return p;
}

inline std::vector<Proposition> read_propositions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<Proposition> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw ParseError(path + ":" + std::to_string(line_no) + ": malformed JSON record");
    out.push_back(proposition_from_json(j));
  }
  return out;
}

inline void write_propositions(const std::string& path, const std::vector<Proposition>& props) {
  std::string buf;
  for (const Proposition& p : props) {
    buf += proposition_to_json(p).dump();
    buf += '\n';
  }
  atomic_write(path, buf);
}

// One span per NOUN/PROPN token standing in an argument relation to some
// predicate, in document order.
inline std::vector<ArgumentSpan> extract_arguments(const DepSentence& sent,
                                                   const ExtractionConfig& cfg = {}) {
  using namespace detail;
  validate_tree(sent);
  auto children = sent.child_index();
  std::set<int> seen;
  std::vector<ArgumentSpan> out;
  for (const Token& tok : sent.tokens) {
    if (tok.upos != "NOUN" && tok.upos != "PROPN") continue;
    if (!argument_role(tok.deprel)) continue;
    if (tok.head == 0) continue;
    const Token& head = sent.at(tok.head);
    bool predicate = head.upos == "VERB";
    if (!predicate) {
      // copular predication: subject of a non-verb with a cop dependent
      for (int dep : children[static_cast<size_t>(head.index)])
        if (base_relation(sent.at(dep).deprel) == "cop") predicate = true;
    }
    if (!predicate) continue;
    if (!seen.insert(tok.index).second) continue;
    ArgumentSpan arg;
    arg.head_index = tok.index;
    arg.head_lemma = slot_lemma(sent, children, tok.index, cfg);
    arg.span = subtree_span(sent, children, tok.index);
    out.push_back(std::move(arg));
  }
  return out;
}

}  // namespace joci
