// Beam search over the decoder and n-best reranking with the reconstruction
// score.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdnmt/model_config.hpp"
#include "pdnmt/nmt.hpp"

namespace pdnmt {

struct Candidate {
  std::vector<int> tokens;  // ends with EOS
  double loglik = 0.0;      // raw sum over steps
  std::optional<double> logrec;
  std::optional<double> dp_score;
  double combined = 0.0;    // loglik + lambda * logrec (+ mu * dp_score)
  bool unfinished = false;  // true when EOS had to be appended at max_len
};

struct NBestList {
  std::vector<int> source_ids;     // encoder input used for these candidates
  std::vector<int> annotated_ids;  // reconstruction target for reranking
  std::vector<int> marker_positions;
  std::vector<Candidate> candidates;  // sorted descending by the active score
};

// Length-normalized pruning, raw-sum scores on the returned candidates,
// ties broken by lexicographic token ids. Returns up to `beam` finished
// candidates; when nothing finishes, the best hypothesis is closed with EOS
// and flagged.
NBestList beam_search(const ParameterStore& store, const ModelConfig& cfg, std::span<const int> src_ids,
                      int beam, int max_len);

struct RerankOptions {
  double lambda = 1.0;     // reconstruction weight
  double mu = 0.0;         // pronoun-prediction confidence weight, off by default
  bool length_normalize_rec = false;
};

// Scores every candidate by teacher-forcing its tokens through the decoder
// and reconstructing the annotated source, then reorders by combined score.
// Returns the index of the selected candidate (always inside the list).
int rerank(const ParameterStore& store, const ModelConfig& cfg, NBestList& nbest,
           const RerankOptions& opt = {});

// Greedy decode convenience: beam_search with beam 1, top candidate tokens
// without the trailing EOS.
std::vector<int> greedy_translate(const ParameterStore& store, const ModelConfig& cfg,
                                  std::span<const int> src_ids, int max_len);

// N-best file format: "index ||| tokens ||| loglik ||| logrec ||| combined".
std::string nbest_to_lines(int sentence_index, const NBestList& nbest, const class Vocabulary& tgt_vocab);

}  // namespace pdnmt
