// Evaluation: case-insensitive 4-gram BLEU with brevity penalty (and no
// smoothing at corpus level), dropped-pronoun precision/recall/F1, and the
// exact two-sided sign test.
#pragma once

#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace pdnmt {

struct BleuReport {
  double bleu = 0.0;  // percentage in [0, 100]
  double precisions[4] = {0.0, 0.0, 0.0, 0.0};
  double brevity_penalty = 1.0;
  int64_t hyp_length = 0;
  int64_t ref_length = 0;
  bool zero_precision = false;  // some order had no matches; BLEU forced to 0

  std::string tsv() const;
  std::string summary() const;
};

// Corpus-level BLEU against a single reference per hypothesis. Tokens are
// case-folded (ASCII) before counting; any zero n-gram precision makes the
// score 0.
BleuReport bleu(const std::vector<std::vector<std::string>>& hypotheses,
                const std::vector<std::vector<std::string>>& references);

// Sentence-level BLEU used for the per-segment sign test: add-one smoothing
// on orders 2..4 so single segments stay comparable.
double sentence_bleu_smoothed(const std::vector<std::string>& hypothesis,
                              const std::vector<std::string>& reference);

struct F1Report {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  std::string tsv() const;
};

// Predictions and gold are (sentence, position) or (sentence, position,
// word) triples; word-mode matching requires the word to agree as well.
using DpItem = std::tuple<int, int, std::string>;

enum class DpMatchMode { Position, Word };

F1Report dp_f1(const std::set<DpItem>& predicted, const std::set<DpItem>& gold, DpMatchMode mode);

struct SignTestResult {
  double p_value = 1.0;
  int wins_a = 0;
  int wins_b = 0;
  int ties = 0;
  bool all_tied = false;
};

// Exact two-sided binomial sign test at q = 1/2; ties are dropped.
SignTestResult sign_test(const std::vector<double>& scores_a, const std::vector<double>& scores_b);

}  // namespace pdnmt
