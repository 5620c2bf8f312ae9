#pragma once

// Step (d): instantiate derived properties with context arguments and
// verbalize them into English sentences. Realization is deliberately small:
// a/an/the by context presence and vowel rule, third-person-singular
// agreement with a short irregular-verb table, always-singular arguments.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "joci/extraction.hpp"
#include "joci/properties.hpp"

namespace joci {

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HypothesisCandidate {
  std::string context_id;
  std::string argument_lemma;
  SenseId source_sense;
  std::string pattern;
  std::string surface;
  Strategy strategy = Strategy::freq;

  bool operator==(const HypothesisCandidate&) const = default;
};

// A phrase to realize; is_noun gates article insertion (adjectival
// complements of "be" take none).
struct Phrase {
  std::vector<std::string> words;
  bool is_noun = true;
};

namespace detail {

inline const std::set<std::string>& determiners() {
  static const std::set<std::string> kDet{"the", "a",    "an",  "his",  "her", "my",  "your",
                                          "their", "its", "this", "that", "some", "no", "every"};
  return kDet;
}

inline const std::set<std::string>& plural_nouns() {
  static const std::set<std::string> kPlural{"people", "men", "women", "children"};
  return kPlural;
}

inline bool is_vowel_initial(const std::string& w) {
  if (w.empty()) return false;
  char c = static_cast<char>(std::tolower(static_cast<unsigned char>(w[0])));
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

inline bool is_plural_phrase(const Phrase& p) {
  return !p.words.empty() && plural_nouns().count(to_lower(p.words.back())) > 0;
}

// 3rd-person present conjugation; plural subjects take the base form.
inline std::string conjugate(const std::string& lemma, bool plural_subject) {
  std::string v = to_lower(lemma);
  if (v == "be") return plural_subject ? "are" : "is";
  if (plural_subject) return v;
  if (v == "have") return "has";
  if (v == "do") return "does";
  if (v == "go") return "goes";
  size_t n = v.size();
  auto ends_with = [&](const char* suf) {
    size_t m = std::char_traits<char>::length(suf);
    return n >= m && v.compare(n - m, m, suf) == 0;
  };
  if (ends_with("s") || ends_with("x") || ends_with("z") || ends_with("ch") || ends_with("sh") ||
      ends_with("o"))
    return v + "es";
  if (n >= 2 && v[n - 1] == 'y' && !is_vowel_initial(std::string(1, v[n - 2])))
    return v.substr(0, n - 1) + "ies";
  return v + "s";
}

// Prepend an article to a bare singular noun phrase: "the" if the head
// lemma is mentioned in the context, otherwise a/an.
inline std::vector<std::string> realize_phrase(const Phrase& phrase,
                                               const std::set<std::string>& context_words) {
  std::vector<std::string> words;
  for (const std::string& w : phrase.words) words.push_back(to_lower(w));
  if (words.empty()) return words;
  if (!phrase.is_noun) return words;
  if (determiners().count(words.front())) return words;
  if (is_plural_phrase(phrase)) return words;
  std::string article;
  if (context_words.count(words.back()))
    article = "the";
  else
    article = is_vowel_initial(words.front()) ? "an" : "a";
  words.insert(words.begin(), article);
  return words;
}

inline const std::set<std::string>& prepositions() {
  static const std::set<std::string> kPrep{"to",    "from",  "in",     "on",     "at",    "with",
                                           "for",   "of",    "by",     "about",  "into",  "over",
                                           "under", "after", "before", "during", "through", "near"};
  return kPrep;
}

}  // namespace detail

// Renders "subject predicate [object] [prep phrase...]" with agreement,
// articles, capitalization, and a detached final period.
inline std::string verbalize(const Phrase& subject, const std::string& predicate,
                             const std::optional<Phrase>& object,
                             const std::vector<std::pair<std::string, Phrase>>& prep_phrases,
                             const std::set<std::string>& context_words) {
  if (predicate.empty()) throw GenerationError("verbalize: empty predicate");
  if (subject.words.empty()) throw GenerationError("verbalize: empty subject");

  std::vector<std::string> words = detail::realize_phrase(subject, context_words);
  words.push_back(detail::conjugate(predicate, detail::is_plural_phrase(subject)));
  if (object)
    for (auto& w : detail::realize_phrase(*object, context_words)) words.push_back(w);
  for (const auto& [prep, phrase] : prep_phrases) {
    words.push_back(to_lower(prep));
    for (auto& w : detail::realize_phrase(phrase, context_words)) words.push_back(w);
  }
  std::string sentence = join(words, " ");
  sentence[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sentence[0])));
  return sentence + " .";
}

namespace detail {

// Patterns are flat lemma strings "subj pred rest..."; rest splits into an
// object phrase and preposition phrases.
struct ParsedPattern {
  Phrase subject;
  std::string predicate;
  std::optional<Phrase> object;
  std::vector<std::pair<std::string, Phrase>> prep_phrases;
};

inline std::optional<ParsedPattern> parse_pattern_instance(const std::string& text,
                                                           bool object_is_noun) {
  std::vector<std::string> tokens = split_ws(text);
  if (tokens.size() < 2) return std::nullopt;
  ParsedPattern out;
  out.subject.words = {tokens[0]};
  out.predicate = tokens[1];
  Phrase* current = nullptr;
  for (size_t i = 2; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    if (prepositions().count(tok) && !(current && current->words.empty())) {
      out.prep_phrases.emplace_back(tok, Phrase{});
      current = &out.prep_phrases.back().second;
      continue;
    }
    if (!current) {
      out.object = Phrase{{}, object_is_noun};
      current = &*out.object;
    }
    current->words.push_back(tok);
  }
  if (out.object && out.object->words.empty()) return std::nullopt;
  for (auto& [_, phrase] : out.prep_phrases)
    if (phrase.words.empty()) return std::nullopt;
  return out;
}

inline std::string instantiate(const std::string& pattern, const std::string& argument) {
  std::string out = pattern;
  auto pos = out.find(kPlaceholder);
  if (pos == std::string::npos) return out;
  out.replace(pos, std::char_traits<char>::length(kPlaceholder), argument);
  return out;
}

}  // namespace detail

inline std::set<std::string> context_word_set(const DepSentence& sent) {
  std::set<std::string> words;
  for (const Token& t : sent.tokens) {
    words.insert(to_lower(t.surface));
    words.insert(to_lower(t.lemma));
  }
  return words;
}

// For each argument of the context, instantiate properties from ALL senses
// of the argument lemma, round-robin across strategies, capped per
// argument, with duplicate surfaces dropped.
inline std::vector<HypothesisCandidate> generate(const DepSentence& context, const Taxonomy& tax,
                                                 const PropertyTable& properties,
                                                 int per_arg_limit = 5,
                                                 const ExtractionConfig& cfg = {}) {
  std::vector<HypothesisCandidate> out;
  std::set<std::string> seen_surfaces;
  std::set<std::string> context_words = context_word_set(context);

  for (const ArgumentSpan& arg : extract_arguments(context, cfg)) {
    const std::vector<SenseId>& senses = tax.senses_of(arg.head_lemma);
    if (senses.empty()) continue;

    // one queue per strategy, senses in index order, properties in score order
    std::vector<std::vector<std::pair<SenseId, const Property*>>> queues(3);
    for (const SenseId& sense : senses) {
      auto it = properties.find(sense);
      if (it == properties.end()) continue;
      for (const Property& p : it->second)
        queues[static_cast<size_t>(p.strategy)].emplace_back(sense, &p);
    }

    int emitted = 0;
    std::vector<size_t> cursor(3, 0);
    bool progress = true;
    while (emitted < per_arg_limit && progress) {
      progress = false;
      for (size_t q = 0; q < queues.size() && emitted < per_arg_limit; ++q) {
        // advance this strategy's queue until one candidate is emitted;
        // duplicates and malformed patterns do not consume the limit
        while (cursor[q] < queues[q].size()) {
          auto [sense, prop] = queues[q][cursor[q]++];
          progress = true;
          std::string instance = detail::instantiate(prop->pattern, arg.head_lemma);
          auto parsed = detail::parse_pattern_instance(instance, true);
          if (!parsed) continue;
          if (parsed->object && parsed->predicate == "be" && prop->strategy != Strategy::isa)
            parsed->object->is_noun = false;  // adjectival complement
          std::string surface;
          try {
            surface = verbalize(parsed->subject, parsed->predicate, parsed->object,
                                parsed->prep_phrases, context_words);
          } catch (const GenerationError&) {
            continue;
          }
          if (!seen_surfaces.insert(surface).second) continue;  // duplicate, try next
          HypothesisCandidate cand;
          cand.context_id = context.source_id;
          cand.argument_lemma = arg.head_lemma;
          cand.source_sense = sense;
          cand.pattern = prop->pattern;
          cand.surface = surface;
          cand.strategy = prop->strategy;
          out.push_back(std::move(cand));
          ++emitted;
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace joci
