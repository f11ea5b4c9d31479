#include "pdnmt/reconstructor.hpp"

#include "pdnmt/error.hpp"
#include "pdnmt/vocab.hpp"

namespace pdnmt {

namespace {

void check_annotated_ids(std::span<const int> ids, int vocab) {
  if (ids.empty()) throw RuntimeError("reconstruct: empty annotated sentence");
  for (int id : ids)
    if (id < 0 || id >= vocab)
      throw RuntimeError(strfmt("reconstruct: token id %d out of vocabulary range [0, %d)", id, vocab));
}

// One single-source reconstructor; shared by the separate mode for both
// sides. `prefix` owns embed/init/att/gru/out parameter groups.
ReconstructionOutput reconstruct_single(Graph& g, const ParameterStore& store, const ModelConfig& cfg,
                                        const std::string& prefix, std::span<const int> annotated_ids,
                                        const StateSequence& memory_states, bool memory_is_encoder) {
  check_annotated_ids(annotated_ids, cfg.src_vocab_size);
  const AttentionMemory mem = attention_memory(g, store, prefix + ".att", memory_states);
  const Tensor table = g.param(store, prefix + ".embed.E");

  ReconstructionOutput out;
  Tensor h = g.tanh(g.add(g.matmul(g.param(store, prefix + ".init.W"), memory_states.steps.back()),
                          g.param(store, prefix + ".init.b")));
  Tensor total;
  int prev = Vocabulary::kBos;
  for (size_t t = 0; t < annotated_ids.size(); ++t) {
    const Tensor e = g.embed(table, prev);
    const AttentionRead att = attend(g, store, prefix + ".att", h, e, mem);
    const Tensor gru_in[] = {e, att.context};
    h = gru_step(g, store, prefix + ".gru", g.concat(gru_in), h);
    const Tensor readout_in[] = {e, h, att.context};
    const Tensor proj = g.tanh(g.add(g.matmul(g.param(store, prefix + ".out.W_t"), g.concat(readout_in)),
                                     g.param(store, prefix + ".out.b_t")));
    const Tensor logits =
        g.add(g.matmul(g.param(store, prefix + ".out.W_o"), proj), g.param(store, prefix + ".out.b_o"));
    const Tensor nll = g.nll_onehot(logits, annotated_ids[t]);
    out.step_logprobs.push_back(-nll.item());
    if (memory_is_encoder) {
      out.alpha_enc.push_back(att.weights.values);
      out.ctx_enc.push_back(att.context.values);
    } else {
      out.alpha_dec.push_back(att.weights.values);
      out.ctx_dec.push_back(att.context.values);
    }
    out.states.steps.push_back(h);
    total = t == 0 ? nll : g.add(total, nll);
    prev = annotated_ids[t];
  }
  out.states.stacked = g.stack(out.states.steps);
  out.neg_log_score = total;
  for (double lp : out.step_logprobs) out.log_score += lp;
  return out;
}

}  // namespace

ReconstructionOutput reconstruct_shared(Graph& g, const ParameterStore& store, const ModelConfig& cfg,
                                        std::span<const int> annotated_ids, const StateSequence& enc,
                                        const StateSequence& dec, AttentionVariant variant) {
  check_annotated_ids(annotated_ids, cfg.src_vocab_size);
  if (enc.steps.empty() || dec.steps.empty())
    throw RuntimeError("reconstruct: encoder and decoder states must be non-empty");
  if (variant == AttentionVariant::EncToDec && !store.has("rec.att_dec.W_c"))
    throw RuntimeError("reconstruct: variant enc_to_dec needs rec.att_dec.W_c; the model was built without it");
  if (variant == AttentionVariant::DecToEnc && !store.has("rec.att_enc.W_c"))
    throw RuntimeError("reconstruct: variant dec_to_enc needs rec.att_enc.W_c; the model was built without it");

  const AttentionMemory mem_enc = attention_memory(g, store, "rec.att_enc", enc);
  const AttentionMemory mem_dec = attention_memory(g, store, "rec.att_dec", dec);
  const Tensor table = g.param(store, "rec.embed.E");

  ReconstructionOutput out;
  Tensor h = g.tanh(g.add(g.matmul(g.param(store, "rec.init.W"), dec.steps.back()),
                          g.param(store, "rec.init.b")));
  Tensor total;
  int prev = Vocabulary::kBos;
  for (size_t t = 0; t < annotated_ids.size(); ++t) {
    const Tensor e = g.embed(table, prev);
    AttentionRead att_e, att_d;
    switch (variant) {
      case AttentionVariant::Independent:
        att_e = attend(g, store, "rec.att_enc", h, e, mem_enc);
        att_d = attend(g, store, "rec.att_dec", h, e, mem_dec);
        break;
      case AttentionVariant::EncToDec:
        att_e = attend(g, store, "rec.att_enc", h, e, mem_enc);
        att_d = attend(g, store, "rec.att_dec", h, e, mem_dec, &att_e.context);
        break;
      case AttentionVariant::DecToEnc:
        att_d = attend(g, store, "rec.att_dec", h, e, mem_dec);
        att_e = attend(g, store, "rec.att_enc", h, e, mem_enc, &att_d.context);
        break;
    }
    const Tensor gru_in[] = {e, att_e.context, att_d.context};
    h = gru_step(g, store, "rec.gru", g.concat(gru_in), h);
    const Tensor readout_in[] = {e, h, att_e.context, att_d.context};
    const Tensor proj = g.tanh(g.add(g.matmul(g.param(store, "rec.out.W_t"), g.concat(readout_in)),
                                     g.param(store, "rec.out.b_t")));
    const Tensor logits =
        g.add(g.matmul(g.param(store, "rec.out.W_o"), proj), g.param(store, "rec.out.b_o"));
    const Tensor nll = g.nll_onehot(logits, annotated_ids[t]);
    out.step_logprobs.push_back(-nll.item());
    out.alpha_enc.push_back(att_e.weights.values);
    out.alpha_dec.push_back(att_d.weights.values);
    out.ctx_enc.push_back(att_e.context.values);
    out.ctx_dec.push_back(att_d.context.values);
    out.states.steps.push_back(h);
    total = t == 0 ? nll : g.add(total, nll);
    prev = annotated_ids[t];
  }
  out.states.stacked = g.stack(out.states.steps);
  out.neg_log_score = total;
  for (double lp : out.step_logprobs) out.log_score += lp;
  return out;
}

std::pair<ReconstructionOutput, ReconstructionOutput> reconstruct_separate(
    Graph& g, const ParameterStore& store, const ModelConfig& cfg, std::span<const int> annotated_ids,
    const StateSequence& enc, const StateSequence& dec) {
  if (enc.steps.empty() || dec.steps.empty())
    throw RuntimeError("reconstruct: encoder and decoder states must be non-empty");
  if (!store.has("rec_enc.embed.E"))
    throw RuntimeError("reconstruct: separate reconstructors are not part of this model");
  auto enc_side = reconstruct_single(g, store, cfg, "rec_enc", annotated_ids, enc, true);
  auto dec_side = reconstruct_single(g, store, cfg, "rec_dec", annotated_ids, dec, false);
  return {std::move(enc_side), std::move(dec_side)};
}

Tensor reconstruction_loss(Graph& g, std::span<const Tensor> per_sentence_neg_scores) {
  if (per_sentence_neg_scores.empty()) throw RuntimeError("reconstruction_loss: empty batch");
  Tensor total;
  for (size_t b = 0; b < per_sentence_neg_scores.size(); ++b)
    total = b == 0 ? per_sentence_neg_scores[b] : g.add(total, per_sentence_neg_scores[b]);
  return g.scale(total, 1.0 / static_cast<double>(per_sentence_neg_scores.size()));
}

}  // namespace pdnmt
