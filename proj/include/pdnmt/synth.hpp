// Synthetic pro-drop parallel corpus. The target language is SVO with
// obligatory pronouns; the source mirrors it token for token, conjugates the
// verb for the subject (person/number suffix), and drops subject/object
// pronouns with a configurable probability. Gold alignments and gold marker
// annotations are exact by construction.
//
// The agreement suffix determines the pronoun class but not its gender, so
// recovering a dropped third-person pronoun needs target-side context and
// not just the neighbouring verb.
#pragma once

#include <cstdint>

#include "pdnmt/corpus.hpp"

namespace pdnmt {

struct GeneratorConfig {
  int train_size = 5000;
  int dev_size = 500;
  int test_size = 500;
  double p_drop = 0.5;             // per eligible pronoun
  double p_pronoun_subject = 0.7;  // subject is a pronoun (else a noun)
  double p_pronoun_object = 0.35;  // object is a pronoun (else a noun)
  double p_time = 0.5;             // optional sentence-initial time word
  double p_adverb = 0.4;           // optional sentence-final adverb
  int pronoun_count = 7;           // <= 7
  int noun_count = 12;             // <= 12
  int verb_count = 8;              // <= 8
  int min_len = 3;                 // target-length range
  int max_len = 8;

  void validate() const;
};

struct SyntheticCorpus {
  Corpus train;
  Corpus dev;
  Corpus test;
  PronounLexicon lexicon;
  std::vector<std::string> source_pronouns;  // generator inventory, fixed order
};

// Deterministic for a given (cfg, seed): each example draws from a stream
// keyed by (seed, split, example index), so generation order and sharding do
// not matter.
SyntheticCorpus generate_synthetic_corpus(const GeneratorConfig& cfg, uint64_t seed);

}  // namespace pdnmt
