// Corpus types, dropped-pronoun annotation from word alignments, and the
// corpus file formats (parallel text, alignments, annotated source with a
// TSV sidecar).
#pragma once

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace pdnmt {

// Sentences longer than this are rejected when a corpus is loaded.
inline constexpr int kMaxSentenceLen = 50;

struct DpEntry {
  int position = 0;    // index of the "#DP#" token in the annotated sentence
  std::string word;    // gold pronoun; empty when only the position is known
};

// Source tokens with "#DP#" markers plus the marker bookkeeping.
struct AnnotatedSentence {
  std::vector<std::string> tokens;
  std::vector<DpEntry> dp_entries;

  int marker_count() const { return static_cast<int>(dp_entries.size()); }
  bool has_words() const;
  // Tokens with every marker replaced by its gold pronoun word.
  std::vector<std::string> tokens_with_words() const;
  // Positions mapped to insertion slots of the unannotated sentence.
  std::vector<int> plain_slots() const;
  void validate() const;
};

struct ParallelExample {
  std::vector<std::string> source;
  std::vector<std::string> target;
  std::optional<std::vector<std::pair<int, int>>> alignment;  // (source idx, target idx)
  std::optional<AnnotatedSentence> gold;
};

using Corpus = std::vector<ParallelExample>;

// Closed-class pronoun table: target-language pronoun -> source-language
// pronoun. `unmapped` lists target pronouns that are recognized but have no
// source counterpart; their gold word is recorded as <unk>.
struct PronounLexicon {
  std::unordered_map<std::string, std::string> map;
  std::unordered_set<std::string> unmapped;

  bool is_pronoun(const std::string& target_token) const;
  void validate() const;
  void save(const std::string& path) const;
  static PronounLexicon load(const std::string& path);
};

// Marks every unaligned target pronoun in the source sentence. A pronoun at
// target index j projects to the source slot just after the (rightmost)
// source token aligned to the nearest aligned target token left of j; with
// no aligned token to the left it projects to slot 0. Pronouns projecting to
// the same slot keep target order.
AnnotatedSentence annotate_from_alignment(const ParallelExample& example, const PronounLexicon& lexicon);

// Removes the markers. Returns the plain tokens and the entries re-indexed
// to plain insertion slots. Rejects sentences that are nothing but markers.
std::pair<std::vector<std::string>, std::vector<DpEntry>> strip_annotation(const AnnotatedSentence& s);

// File formats. One sentence per line, single-space separated tokens.
std::vector<std::vector<std::string>> load_tokens(const std::string& path);
void save_tokens(const std::string& path, const std::vector<std::vector<std::string>>& sentences);

Corpus load_corpus(const std::string& src_path, const std::string& tgt_path,
                   const std::string& align_path = "");
void save_corpus(const Corpus& corpus, const std::string& src_path, const std::string& tgt_path,
                 const std::string& align_path = "");

std::vector<AnnotatedSentence> load_annotated(const std::string& tokens_path,
                                              const std::string& sidecar_path);
void save_annotated(const std::vector<AnnotatedSentence>& sentences, const std::string& tokens_path,
                    const std::string& sidecar_path);

// Atomic write helper used by every writer: data lands under a temporary
// name and is renamed into place.
void write_file_atomic(const std::string& path, const std::string& content);

std::string join_tokens(const std::vector<std::string>& tokens);
std::vector<std::string> split_tokens(const std::string& line);

}  // namespace pdnmt
