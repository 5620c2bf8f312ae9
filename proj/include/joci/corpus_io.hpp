#pragma once

// Readers and writers for every external format the pipeline touches:
// CoNLL-U dependency corpora, plain-text embedding tables, and JSON-Lines
// context/hypothesis pair records.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "joci/text.hpp"

namespace joci {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Token {
  int index = 0;  // 1-based position within the sentence
  std::string surface;
  std::string lemma;
  std::string upos;
  int head = 0;  // index of the head token, 0 = root
  std::string deprel;

  bool operator==(const Token&) const = default;
};

struct DepSentence {
  std::vector<Token> tokens;
  std::string source_id;

  bool operator==(const DepSentence&) const = default;

  const Token& at(int index) const { return tokens.at(static_cast<size_t>(index) - 1); }

  // children[i] lists dependents of token i (1-based); children[0] holds the root.
  std::vector<std::vector<int>> child_index() const {
    std::vector<std::vector<int>> children(tokens.size() + 1);
    for (const Token& t : tokens) children[static_cast<size_t>(t.head)].push_back(t.index);
    return children;
  }

  std::string text() const {
    std::vector<std::string> forms;
    forms.reserve(tokens.size());
    for (const Token& t : tokens) forms.push_back(t.surface);
    return join(forms, " ");
  }
};

// Throws ParseError unless the head assignments form a single rooted tree.
inline void validate_tree(const DepSentence& sent) {
  const int n = static_cast<int>(sent.tokens.size());
  int roots = 0;
  for (const Token& t : sent.tokens) {
    if (t.index < 1 || t.index > n || sent.at(t.index).index != t.index)
      throw ParseError("sentence " + sent.source_id + ": token indices are not 1..n");
    if (t.head < 0 || t.head > n)
      throw ParseError("sentence " + sent.source_id + ": head " + std::to_string(t.head) +
                       " out of range");
    if (t.head == t.index)
      throw ParseError("sentence " + sent.source_id + ": token " + std::to_string(t.index) +
                       " is its own head");
    if (t.head == 0) ++roots;
  }
  if (roots != 1)
    throw ParseError("sentence " + sent.source_id + ": expected exactly one root, found " +
                     std::to_string(roots));
  // Walking to the root from every token must terminate.
  for (const Token& t : sent.tokens) {
    int cur = t.index;
    int steps = 0;
    while (cur != 0) {
      cur = sent.at(cur).head;
      if (++steps > n)
        throw ParseError("sentence " + sent.source_id + ": cyclic head structure at token " +
                         std::to_string(t.index));
    }
  }
}

// Columns used: ID FORM LEMMA UPOS ... HEAD DEPREL (fields 1,2,3,4,7,8).
// Multiword ranges ("1-2") and empty nodes ("3.1") are skipped.
inline std::vector<DepSentence> load_conllu(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::vector<DepSentence> sentences;
  DepSentence cur;
  int sentence_no = 1;
  std::string line;
  long line_no = 0;

  auto flush = [&] {
    if (cur.tokens.empty()) {
      cur = DepSentence{};
      return;
    }
    if (cur.source_id.empty()) cur.source_id = "s" + std::to_string(sentence_no);
    ++sentence_no;
    validate_tree(cur);
    sentences.push_back(std::move(cur));
    cur = DepSentence{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (line.rfind("# sent_id", 0) == 0 && eq != std::string::npos)
        cur.source_id = trim(line.substr(eq + 1));
      continue;
    }
    std::vector<std::string> cols = split(line, '\t');
    if (cols.size() < 8)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected >= 8 tab-separated fields, got " +
                       std::to_string(cols.size()));
    const std::string& id = cols[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) continue;
    Token t;
    try {
      t.index = std::stoi(id);
      t.head = std::stoi(cols[6]);
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": non-numeric ID or HEAD field");
    }
    t.surface = cols[1];
    t.lemma = cols[2];
    t.upos = cols[3];
    t.deprel = cols[7];
    cur.tokens.push_back(std::move(t));
  }
  flush();
  return sentences;
}

struct EmbeddingTable {
  int dimension = 0;
  std::unordered_map<std::string, std::vector<double>> entries;

  bool empty() const { return entries.empty(); }

  // Exact-case lookup first, lowercased on a miss.
  const std::vector<double>* lookup(const std::string& word) const {
    auto it = entries.find(word);
    if (it != entries.end()) return &it->second;
    it = entries.find(to_lower(word));
    if (it != entries.end()) return &it->second;
    return nullptr;
  }
};

// Text format: "word v1 v2 ... vd" per line; an optional "count dim" header
// line is tolerated. Dimension is inferred from the first data line.
inline EmbeddingTable load_embeddings(const std::string& path,
                                      const std::set<std::string>* vocab_filter = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  EmbeddingTable table;
  std::string line;
  long line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> parts = split_ws(line);
    if (first && parts.size() == 2) {
      // header "count dim"
      bool numeric = true;
      for (const auto& p : parts)
        for (char c : p)
          if (!std::isdigit(static_cast<unsigned char>(c))) numeric = false;
      if (numeric) {
        table.dimension = std::stoi(parts[1]);
        first = false;
        continue;
      }
    }
    if (parts.size() < 2)
      throw ParseError(path + ":" + std::to_string(line_no) + ": embedding line needs a word and values");
    const int dim = static_cast<int>(parts.size()) - 1;
    if (table.dimension == 0)
      table.dimension = dim;
    else if (dim != table.dimension)
      throw ParseError(path + ":" + std::to_string(line_no) + ": inconsistent dimension " +
                       std::to_string(dim) + " (expected " + std::to_string(table.dimension) + ")");
    first = false;
    if (vocab_filter && !vocab_filter->count(parts[0])) continue;
    std::vector<double> vec(static_cast<size_t>(dim));
    try {
      for (int i = 0; i < dim; ++i) vec[static_cast<size_t>(i)] = std::stod(parts[static_cast<size_t>(i) + 1]);
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": non-numeric embedding value");
    }
    table.entries.emplace(parts[0], std::move(vec));
  }
  return table;
}

// Ordinal annotation value; 0 encodes NA (hypothesis marked nonsensical).
constexpr int kNA = 0;

struct PairRecord {
  std::string context;
  std::string hypothesis;
  std::vector<int> annotations;  // each 1..5, or kNA
  std::optional<int> gold;       // 1..5 when set
  std::string provenance;
  std::vector<std::string> workers;  // optional, parallel to annotations when present

  bool operator==(const PairRecord&) const = default;
};

inline nlohmann::ordered_json pair_to_json(const PairRecord& r) {
  nlohmann::ordered_json j;
  j["context"] = r.context;
  j["hypothesis"] = r.hypothesis;
  j["annotations"] = nlohmann::json::array();
  for (int a : r.annotations) {
    if (a == kNA)
      j["annotations"].push_back(nullptr);
    else
      j["annotations"].push_back(a);
  }
  if (r.gold)
    j["gold"] = *r.gold;
  else
    j["gold"] = nullptr;
  j["provenance"] = r.provenance;
  if (!r.workers.empty()) j["workers"] = r.workers;
  return j;
}

inline PairRecord pair_from_json(const nlohmann::json& j) {
  PairRecord r;
  r.context = j.at("context").get<std::string>();
  r.hypothesis = j.at("hypothesis").get<std::string>();
  if (j.contains("annotations"))
    for (const auto& a : j.at("annotations")) r.annotations.push_back(a.is_null() ? kNA : a.get<int>());
  if (j.contains("gold") && !j.at("gold").is_null()) {
    int g = j.at("gold").get<int>();
    if (g < 1 || g > 5) throw ParseError("gold label out of range: " + std::to_string(g));
    r.gold = g;
  }
  if (j.contains("provenance")) r.provenance = j.at("provenance").get<std::string>();
  if (j.contains("workers")) r.workers = j.at("workers").get<std::vector<std::string>>();
  return r;
}

inline std::vector<PairRecord> read_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<PairRecord> records;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw ParseError(path + ":" + std::to_string(line_no) + ": malformed JSON record");
    try {
      records.push_back(pair_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

// Writes to a temp file in the same directory, then renames into place.
inline void atomic_write(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path dir = target.parent_path();
  if (dir.empty()) dir = ".";
  fs::path tmp = dir / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

inline void write_pairs(const std::string& path, const std::vector<PairRecord>& records) {
  std::string buf;
  for (const PairRecord& r : records) {
    buf += pair_to_json(r).dump();
    buf += '\n';
  }
  atomic_write(path, buf);
}

}  // namespace joci
