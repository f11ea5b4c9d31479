// Attention-based recurrent encoder-decoder. Bidirectional single-layer GRU
// encoder, conditional GRU decoder with additive attention, tanh readout.
// All functions record into a caller-owned Graph so the same code path
// serves training, scoring and search.
#pragma once

#include <span>
#include <vector>

#include "pdnmt/graph.hpp"
#include "pdnmt/model_config.hpp"
#include "pdnmt/param_store.hpp"

namespace pdnmt {

// Creates every parameter the configuration calls for. Weights are uniform
// in [-0.08, 0.08] keyed by (seed, name); biases start at zero.
void init_parameters(ParameterStore& store, const ModelConfig& cfg, uint64_t seed);

// A length-indexed sequence of hidden vectors plus its stacked [len x width]
// form used as attention memory.
struct StateSequence {
  std::vector<Tensor> steps;
  Tensor stacked;
  int length() const { return static_cast<int>(steps.size()); }
};

// One attention model's read-only view of a memory: the stacked states and
// their projection through that model's memory weight.
struct AttentionMemory {
  Tensor mat;
  Tensor proj;
  int len = 0;
  int width = 0;
};

AttentionMemory attention_memory(Graph& g, const ParameterStore& store, const std::string& att_prefix,
                                 const StateSequence& states);

struct AttentionRead {
  Tensor weights;  // [len], rows of the attention matrix
  Tensor context;  // [width]
};

// Additive attention: scores = v . tanh(U m_j + W_q q + W_e e (+ W_c fed) + b).
// `fed` is the other attention model's context in the interactive wirings;
// pass nullptr for the independent form.
AttentionRead attend(Graph& g, const ParameterStore& store, const std::string& att_prefix,
                     const Tensor& query_state, const Tensor& prev_emb, const AttentionMemory& mem,
                     const Tensor* fed = nullptr);

// GRU cell under `prefix` (expects W_z/W_r/W_h, U_z/U_r/U_h, b_z/b_r/b_h).
Tensor gru_step(Graph& g, const ParameterStore& store, const std::string& prefix, const Tensor& x,
                const Tensor& h_prev);

StateSequence encode(Graph& g, const ParameterStore& store, const ModelConfig& cfg,
                     std::span<const int> src_ids);

// Decoder start state from the final encoder state.
Tensor decoder_init(Graph& g, const ParameterStore& store, const StateSequence& enc);

struct DecoderStep {
  Tensor state;    // [hidden]
  Tensor context;  // [2 hidden]
  Tensor logits;   // [tgt vocab]
  Tensor att_weights;
};

DecoderStep decoder_step(Graph& g, const ParameterStore& store, const ModelConfig& cfg,
                         const AttentionMemory& mem, const Tensor& s_prev, int prev_token);

struct TeacherForcedResult {
  StateSequence states;
  std::vector<double> step_logprobs;     // log p(y_i), length I
  std::vector<std::vector<double>> attention;  // I rows over J
  Tensor nll;                            // scalar node, sum over steps
};

// y must be non-empty and end with EOS.
TeacherForcedResult decode_teacher_forced(Graph& g, const ParameterStore& store, const ModelConfig& cfg,
                                          const StateSequence& enc, std::span<const int> tgt_ids);

// Mean over the batch of per-sentence summed NLL.
Tensor likelihood_loss(Graph& g, const ParameterStore& store, const ModelConfig& cfg,
                       std::span<const std::vector<int>> src_batch,
                       std::span<const std::vector<int>> tgt_batch);

}  // namespace pdnmt
