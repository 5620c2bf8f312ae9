#pragma once

// Noun-sense hierarchy: a rooted DAG of senses with hypernym edges, a
// lemma -> ordered-senses index, first-sense lookup, and depth-based cut
// points that gate which senses may anchor templates.

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "joci/corpus_io.hpp"
#include "joci/text.hpp"

namespace joci {

struct LookupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SenseId {
  std::string lemma;
  int sense_number = 1;  // >= 1; POS is fixed to "n"

  auto operator<=>(const SenseId&) const = default;

  std::string str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d", sense_number);
    return lemma + ".n." + buf;
  }

  static SenseId parse(const std::string& s) {
    auto pos = s.rfind(".n.");
    if (pos == std::string::npos || pos + 3 >= s.size())
      throw ParseError("not a sense id: " + s);
    SenseId id;
    id.lemma = s.substr(0, pos);
    try {
      id.sense_number = std::stoi(s.substr(pos + 3));
    } catch (const std::exception&) {
      throw ParseError("not a sense id: " + s);
    }
    if (id.sense_number < 1) throw ParseError("sense number must be >= 1: " + s);
    return id;
  }
};

class Taxonomy {
 public:
  static constexpr int kDefaultCutDepth = 4;

  Taxonomy() = default;

  void add_sense(const SenseId& sense, const std::vector<SenseId>& parents) {
    parents_[sense].insert(parents.begin(), parents.end());
    for (const SenseId& p : parents) {
      children_[p].insert(sense);
      parents_.try_emplace(p);  // parents mentioned only on the right exist too
    }
    depths_valid_ = false;
  }

  void set_cut_depth(int d) { cut_depth_ = d; }
  int cut_depth() const { return cut_depth_; }

  void finalize() {
    lemma_index_.clear();
    for (const auto& [sense, _] : parents_) lemma_index_[sense.lemma].push_back(sense);
    for (auto& [_, senses] : lemma_index_) std::sort(senses.begin(), senses.end());
    compute_depths();
  }

  bool contains(const SenseId& s) const { return parents_.count(s) > 0; }
  size_t size() const { return parents_.size(); }

  std::optional<SenseId> first_sense(const std::string& lemma) const {
    auto it = lemma_index_.find(lemma);
    if (it == lemma_index_.end() || it->second.empty()) return std::nullopt;
    return it->second.front();
  }

  const std::vector<SenseId>& senses_of(const std::string& lemma) const {
    static const std::vector<SenseId> kEmpty;
    auto it = lemma_index_.find(lemma);
    return it == lemma_index_.end() ? kEmpty : it->second;
  }

  // Shortest hypernym path to any root; roots have depth 0.
  int depth(const SenseId& sense) const {
    auto it = depth_.find(sense);
    if (it == depth_.end()) throw LookupError("unknown sense: " + sense.str());
    return it->second;
  }

  bool below_cut(const SenseId& sense) const { return depth(sense) >= cut_depth_; }

  // Direct parents, lexicographically ordered.
  std::vector<SenseId> hypernyms(const SenseId& sense) const {
    auto it = parents_.find(sense);
    if (it == parents_.end()) throw LookupError("unknown sense: " + sense.str());
    return {it->second.begin(), it->second.end()};
  }

  // Union over parents of their children, excluding the sense itself.
  std::set<SenseId> co_hyponyms(const SenseId& sense) const {
    auto it = parents_.find(sense);
    if (it == parents_.end()) throw LookupError("unknown sense: " + sense.str());
    std::set<SenseId> out;
    for (const SenseId& p : it->second) {
      auto cit = children_.find(p);
      if (cit == children_.end()) continue;
      out.insert(cit->second.begin(), cit->second.end());
    }
    out.erase(sense);
    return out;
  }

  std::set<SenseId> children(const SenseId& sense) const {
    auto it = children_.find(sense);
    return it == children_.end() ? std::set<SenseId>{} : it->second;
  }

  std::vector<SenseId> roots() const {
    std::vector<SenseId> out;
    for (const auto& [sense, parents] : parents_)
      if (parents.empty()) out.push_back(sense);
    return out;
  }

  // Senses with at least two below-cut children; decision-tree families are
  // trained per parent.
  std::vector<SenseId> family_parents() const {
    std::vector<SenseId> out;
    for (const auto& [sense, kids] : children_)
      if (kids.size() >= 2) out.push_back(sense);
    return out;
  }

  const std::map<std::string, std::vector<SenseId>>& lemma_index() const { return lemma_index_; }
  const std::map<SenseId, std::set<SenseId>>& all_senses() const { return parents_; }

 private:
  void compute_depths() {
    // Kahn's algorithm over parent edges proves the DAG property first.
    std::map<SenseId, size_t> remaining;
    std::deque<SenseId> ready;
    for (const auto& [sense, parents] : parents_) {
      remaining[sense] = parents.size();
      if (parents.empty()) ready.push_back(sense);
    }
    if (ready.empty() && !parents_.empty())
      throw ParseError("taxonomy has no root (every sense has a parent)");
    size_t visited = 0;
    while (!ready.empty()) {
      SenseId cur = ready.front();
      ready.pop_front();
      ++visited;
      auto cit = children_.find(cur);
      if (cit == children_.end()) continue;
      for (const SenseId& child : cit->second)
        if (--remaining[child] == 0) ready.push_back(child);
    }
    if (visited != parents_.size())
      throw ParseError("taxonomy hypernym graph contains a cycle");

    // Multi-source BFS downward: depth(child) = 1 + min over parents.
    depth_.clear();
    std::deque<SenseId> queue;
    for (const auto& [sense, parents] : parents_) {
      if (parents.empty()) {
        depth_[sense] = 0;
        queue.push_back(sense);
      }
    }
    while (!queue.empty()) {
      SenseId cur = queue.front();
      queue.pop_front();
      auto cit = children_.find(cur);
      if (cit == children_.end()) continue;
      for (const SenseId& child : cit->second) {
        if (!depth_.count(child)) {
          depth_[child] = depth_[cur] + 1;
          queue.push_back(child);
        }
      }
    }
    depths_valid_ = true;
  }

  std::map<SenseId, std::set<SenseId>> parents_;
  std::map<SenseId, std::set<SenseId>> children_;
  std::map<SenseId, int> depth_;
  std::map<std::string, std::vector<SenseId>> lemma_index_;
  int cut_depth_ = kDefaultCutDepth;
  bool depths_valid_ = false;
};

// TSV lines: SENSE <tab> sense_number <tab> comma-separated parent senses
// (third field empty for roots). Comment lines start with '#'.
inline Taxonomy load_taxonomy(const std::string& path, int cut_depth = Taxonomy::kDefaultCutDepth) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Taxonomy tax;
  tax.set_cut_depth(cut_depth);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    std::vector<std::string> cols = split(line, '\t');
    if (cols.size() < 2)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected at least 2 tab-separated fields");
    SenseId sense = SenseId::parse(cols[0]);
    int number = 0;
    try {
      number = std::stoi(cols[1]);
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": non-numeric sense number");
    }
    if (number != sense.sense_number)
      throw ParseError(path + ":" + std::to_string(line_no) + ": sense number column disagrees with sense id");
    std::vector<SenseId> parents;
    if (cols.size() >= 3 && !trim(cols[2]).empty())
      for (const std::string& p : split(cols[2], ','))
        parents.push_back(SenseId::parse(trim(p)));
    tax.add_sense(sense, parents);
  }
  tax.finalize();
  return tax;
}

}  // namespace joci
