// Reconstruction of the annotated source sentence from model hidden states.
// The shared reconstructor reads encoder and decoder states through two
// attention models (independent, or interactive in either direction); the
// separate form runs one single-source reconstructor per state sequence.
#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pdnmt/nmt.hpp"

namespace pdnmt {

struct ReconstructionOutput {
  std::vector<double> step_logprobs;           // log p(x_t), length T
  double log_score = 0.0;                      // sum of step_logprobs
  std::vector<std::vector<double>> alpha_enc;  // T rows over J (empty when unused)
  std::vector<std::vector<double>> alpha_dec;  // T rows over I (empty when unused)
  std::vector<std::vector<double>> ctx_enc;    // context vectors per step
  std::vector<std::vector<double>> ctx_dec;
  StateSequence states;                        // reconstructor hidden states, length T
  Tensor neg_log_score;                        // scalar graph node, -log score
};

// Shared reconstructor over both state sequences. Step t attends per the
// requested wiring (the interactive forms feed one context into the other
// scorer), updates a GRU on [embedding; both contexts], and scores the
// current annotated token.
ReconstructionOutput reconstruct_shared(Graph& g, const ParameterStore& store, const ModelConfig& cfg,
                                        std::span<const int> annotated_ids, const StateSequence& enc,
                                        const StateSequence& dec, AttentionVariant variant);

// Separate reconstructors with their own parameters, one per state sequence.
// Scores are summed by the callers that combine them.
std::pair<ReconstructionOutput, ReconstructionOutput> reconstruct_separate(
    Graph& g, const ParameterStore& store, const ModelConfig& cfg, std::span<const int> annotated_ids,
    const StateSequence& enc, const StateSequence& dec);

// Mean over the batch of -log R. Each element is one sentence's summed
// negative log score node.
Tensor reconstruction_loss(Graph& g, std::span<const Tensor> per_sentence_neg_scores);

}  // namespace pdnmt
