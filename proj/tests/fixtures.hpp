#pragma once

// Shared hand-built parse and taxonomy fixtures for the test suites.

#include <initializer_list>
#include <string>

#include "joci/corpus_io.hpp"
#include "joci/taxonomy.hpp"

namespace fixtures {

struct Tok {
  const char* surface;
  const char* lemma;
  const char* upos;
  int head;
  const char* deprel;
};

inline joci::DepSentence sentence(std::initializer_list<Tok> toks, std::string id = "test") {
  joci::DepSentence s;
  s.source_id = std::move(id);
  int index = 1;
  for (const Tok& t : toks) {
    joci::Token tok;
    tok.index = index++;
    tok.surface = t.surface;
    tok.lemma = t.lemma;
    tok.upos = t.upos;
    tok.head = t.head;
    tok.deprel = t.deprel;
    s.tokens.push_back(std::move(tok));
  }
  return s;
}

// "Dave found an axe in his garage ."
inline joci::DepSentence dave_axe() {
  return sentence({{"Dave", "Dave", "PROPN", 2, "nsubj"},
                   {"found", "find", "VERB", 0, "root"},
                   {"an", "a", "DET", 4, "det"},
                   {"axe", "axe", "NOUN", 2, "obj"},
                   {"in", "in", "ADP", 7, "case"},
                   {"his", "his", "PRON", 7, "nmod:poss"},
                   {"garage", "garage", "NOUN", 2, "obl"},
                   {".", ".", "PUNCT", 2, "punct"}},
                  "dave_axe");
}

// "The ocean is carbonated ."
inline joci::DepSentence ocean_carbonated() {
  return sentence({{"The", "the", "DET", 2, "det"},
                   {"ocean", "ocean", "NOUN", 4, "nsubj"},
                   {"is", "be", "AUX", 4, "cop"},
                   {"carbonated", "carbonated", "ADJ", 0, "root"},
                   {".", ".", "PUNCT", 4, "punct"}},
                  "ocean_carbonated");
}

// "My friends and I decided to go swimming in the ocean"
inline joci::DepSentence friends_ocean() {
  return sentence({{"My", "my", "PRON", 2, "nmod:poss"},
                   {"friends", "friend", "NOUN", 5, "nsubj"},
                   {"and", "and", "CCONJ", 4, "cc"},
                   {"I", "I", "PRON", 2, "conj"},
                   {"decided", "decide", "VERB", 0, "root"},
                   {"to", "to", "PART", 7, "mark"},
                   {"go", "go", "VERB", 5, "xcomp"},
                   {"swimming", "swim", "VERB", 7, "xcomp"},
                   {"in", "in", "ADP", 11, "case"},
                   {"the", "the", "DET", 11, "det"},
                   {"ocean", "ocean", "NOUN", 8, "obl"}},
                  "friends_ocean");
}

// "Mrs. MacReady arrived ."
inline joci::DepSentence mrs_macready() {
  return sentence({{"Mrs.", "Mrs.", "PROPN", 2, "compound"},
                   {"MacReady", "MacReady", "PROPN", 3, "nsubj"},
                   {"arrived", "arrive", "VERB", 0, "root"},
                   {".", ".", "PUNCT", 3, "punct"}},
                  "mrs_macready");
}

// publication.n.01 family from the paper's running example, rooted deep
// enough that the leaves clear the default cut depth.
inline joci::Taxonomy publication_taxonomy() {
  using joci::SenseId;
  joci::Taxonomy tax;
  tax.add_sense(SenseId{"entity", 1}, {});
  tax.add_sense(SenseId{"physical_entity", 1}, {SenseId{"entity", 1}});
  tax.add_sense(SenseId{"object", 1}, {SenseId{"physical_entity", 1}});
  tax.add_sense(SenseId{"whole", 2}, {SenseId{"object", 1}});
  tax.add_sense(SenseId{"artifact", 1}, {SenseId{"whole", 2}});
  tax.add_sense(SenseId{"creation", 2}, {SenseId{"artifact", 1}});
  tax.add_sense(SenseId{"product", 2}, {SenseId{"creation", 2}});
  tax.add_sense(SenseId{"publication", 1}, {SenseId{"product", 2}});
  tax.add_sense(SenseId{"book", 1}, {SenseId{"publication", 1}});
  tax.add_sense(SenseId{"magazine", 1}, {SenseId{"publication", 1}});
  tax.add_sense(SenseId{"collection", 2}, {SenseId{"publication", 1}});
  // second senses so first-sense lookup is non-trivial
  tax.add_sense(SenseId{"book", 2}, {SenseId{"product", 2}});
  tax.add_sense(SenseId{"living_thing", 1}, {SenseId{"whole", 2}});
  tax.add_sense(SenseId{"organism", 1}, {SenseId{"living_thing", 1}});
  tax.add_sense(SenseId{"person", 1}, {SenseId{"organism", 1}});
  tax.finalize();
  return tax;
}

}  // namespace fixtures
