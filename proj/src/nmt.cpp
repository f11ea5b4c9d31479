#include "pdnmt/nmt.hpp"

#include <algorithm>

#include "pdnmt/corpus.hpp"
#include "pdnmt/error.hpp"
#include "pdnmt/vocab.hpp"

namespace pdnmt {

namespace {

void init_gru(ParameterStore& s, const std::string& prefix, int in, int hidden, Partition p, uint64_t seed) {
  for (const char* gate : {"z", "r", "h"}) {
    s.create_uniform(prefix + ".W_" + gate, {hidden, in}, p, seed);
    s.create_uniform(prefix + ".U_" + gate, {hidden, hidden}, p, seed);
    s.create_zeros(prefix + ".b_" + gate, {hidden}, p);
  }
}

void init_attention(ParameterStore& s, const std::string& prefix, int query, int embed, int memory,
                    int att, Partition p, uint64_t seed, int fed_width = 0) {
  s.create_uniform(prefix + ".W_q", {att, query}, p, seed);
  s.create_uniform(prefix + ".W_e", {att, embed}, p, seed);
  s.create_uniform(prefix + ".U", {memory, att}, p, seed);
  s.create_zeros(prefix + ".b", {att}, p);
  s.create_uniform(prefix + ".v", {att}, p, seed);
  if (fed_width > 0) s.create_uniform(prefix + ".W_c", {att, fed_width}, p, seed);
}

void init_readout(ParameterStore& s, const std::string& prefix, int in, int hidden, int vocab,
                  Partition p, uint64_t seed) {
  s.create_uniform(prefix + ".W_t", {hidden, in}, p, seed);
  s.create_zeros(prefix + ".b_t", {hidden}, p);
  s.create_uniform(prefix + ".W_o", {vocab, hidden}, p, seed);
  s.create_zeros(prefix + ".b_o", {vocab}, p);
}

}  // namespace

void init_parameters(ParameterStore& store, const ModelConfig& cfg, uint64_t seed) {
  cfg.validate();
  const int e = cfg.embed_size;
  const int h = cfg.hidden_size;
  const int a = h;  // attention hidden size

  store.create_uniform("src_embed.E", {cfg.src_vocab_size, e}, Partition::Theta, seed);
  store.create_uniform("tgt_embed.E", {cfg.tgt_vocab_size, e}, Partition::Theta, seed);
  init_gru(store, "enc.fwd", e, h, Partition::Theta, seed);
  init_gru(store, "enc.bwd", e, h, Partition::Theta, seed);
  store.create_uniform("dec.init.W", {h, 2 * h}, Partition::Theta, seed);
  store.create_zeros("dec.init.b", {h}, Partition::Theta);
  init_attention(store, "dec.att", h, e, 2 * h, a, Partition::Theta, seed);
  init_gru(store, "dec.gru", e + 2 * h, h, Partition::Theta, seed);
  init_readout(store, "dec.out", h + 2 * h + e, h, cfg.tgt_vocab_size, Partition::Theta, seed);

  if (cfg.mode == ReconstructorMode::Shared) {
    store.create_uniform("rec.embed.E", {cfg.src_vocab_size, e}, Partition::Gamma, seed);
    store.create_uniform("rec.init.W", {h, h}, Partition::Gamma, seed);
    store.create_zeros("rec.init.b", {h}, Partition::Gamma);
    init_attention(store, "rec.att_enc", h, e, 2 * h, a, Partition::Gamma, seed,
                   cfg.variant == AttentionVariant::DecToEnc ? h : 0);
    init_attention(store, "rec.att_dec", h, e, h, a, Partition::Gamma, seed,
                   cfg.variant == AttentionVariant::EncToDec ? 2 * h : 0);
    init_gru(store, "rec.gru", e + 2 * h + h, h, Partition::Gamma, seed);
    init_readout(store, "rec.out", e + h + 2 * h + h, h, cfg.src_vocab_size, Partition::Gamma, seed);
  } else if (cfg.mode == ReconstructorMode::Separate) {
    store.create_uniform("rec_enc.embed.E", {cfg.src_vocab_size, e}, Partition::Gamma, seed);
    store.create_uniform("rec_enc.init.W", {h, 2 * h}, Partition::Gamma, seed);
    store.create_zeros("rec_enc.init.b", {h}, Partition::Gamma);
    init_attention(store, "rec_enc.att", h, e, 2 * h, a, Partition::Gamma, seed);
    init_gru(store, "rec_enc.gru", e + 2 * h, h, Partition::Gamma, seed);
    init_readout(store, "rec_enc.out", e + h + 2 * h, h, cfg.src_vocab_size, Partition::Gamma, seed);

    store.create_uniform("rec_dec.embed.E", {cfg.src_vocab_size, e}, Partition::Gamma, seed);
    store.create_uniform("rec_dec.init.W", {h, h}, Partition::Gamma, seed);
    store.create_zeros("rec_dec.init.b", {h}, Partition::Gamma);
    init_attention(store, "rec_dec.att", h, e, h, a, Partition::Gamma, seed);
    init_gru(store, "rec_dec.gru", e + h, h, Partition::Gamma, seed);
    init_readout(store, "rec_dec.out", e + h + h, h, cfg.src_vocab_size, Partition::Gamma, seed);
  }

  if (cfg.joint_prediction) {
    store.create_uniform("dp.W", {cfg.pronoun_vocab_size, h}, Partition::Psi, seed);
    store.create_zeros("dp.b", {cfg.pronoun_vocab_size}, Partition::Psi);
  }
}

Tensor gru_step(Graph& g, const ParameterStore& store, const std::string& prefix, const Tensor& x,
                const Tensor& h_prev) {
  auto gate = [&](const char* name) {
    return g.add(g.add(g.matmul(g.param(store, prefix + ".W_" + name), x),
                       g.matmul(g.param(store, prefix + ".U_" + name), h_prev)),
                 g.param(store, prefix + ".b_" + name));
  };
  const Tensor z = g.sigmoid(gate("z"));
  const Tensor r = g.sigmoid(gate("r"));
  const Tensor candidate =
      g.tanh(g.add(g.add(g.matmul(g.param(store, prefix + ".W_h"), x),
                         g.matmul(g.param(store, prefix + ".U_h"), g.mul(r, h_prev))),
                   g.param(store, prefix + ".b_h")));
  return g.add(g.mul(g.affine(z, -1.0, 1.0), h_prev), g.mul(z, candidate));
}

AttentionMemory attention_memory(Graph& g, const ParameterStore& store, const std::string& att_prefix,
                                 const StateSequence& states) {
  if (states.steps.empty()) throw RuntimeError("attention: empty memory");
  AttentionMemory mem;
  mem.mat = states.stacked;
  mem.proj = g.matmul(states.stacked, g.param(store, att_prefix + ".U"));
  mem.len = states.length();
  mem.width = states.stacked.cols();
  return mem;
}

AttentionRead attend(Graph& g, const ParameterStore& store, const std::string& att_prefix,
                     const Tensor& query_state, const Tensor& prev_emb, const AttentionMemory& mem,
                     const Tensor* fed) {
  Tensor query = g.add(g.matmul(g.param(store, att_prefix + ".W_q"), query_state),
                       g.matmul(g.param(store, att_prefix + ".W_e"), prev_emb));
  if (fed != nullptr)
    query = g.add(query, g.matmul(g.param(store, att_prefix + ".W_c"), *fed));
  query = g.add(query, g.param(store, att_prefix + ".b"));
  const Tensor scores = g.matmul(g.tanh(g.add(mem.proj, query)), g.param(store, att_prefix + ".v"));
  AttentionRead read;
  read.weights = g.softmax(scores);
  read.context = g.matmul(read.weights, mem.mat);
  return read;
}

StateSequence encode(Graph& g, const ParameterStore& store, const ModelConfig& cfg,
                     std::span<const int> src_ids) {
  const int J = static_cast<int>(src_ids.size());
  if (J < 1) throw RuntimeError("encode: empty source");
  if (J > kMaxSentenceLen) throw RuntimeError(strfmt("encode: source longer than %d tokens", kMaxSentenceLen));
  for (int id : src_ids)
    if (id < 0 || id >= cfg.src_vocab_size)
      throw RuntimeError(strfmt("encode: token id %d out of vocabulary range [0, %d)", id, cfg.src_vocab_size));

  const Tensor table = g.param(store, "src_embed.E");
  std::vector<Tensor> emb;
  emb.reserve(static_cast<size_t>(J));
  for (int id : src_ids) emb.push_back(g.embed(table, id));

  const int h = cfg.hidden_size;
  std::vector<Tensor> fwd(static_cast<size_t>(J)), bwd(static_cast<size_t>(J));
  Tensor state = g.input(Tensor::zeros({h}));
  for (int j = 0; j < J; ++j) {
    state = gru_step(g, store, "enc.fwd", emb[static_cast<size_t>(j)], state);
    fwd[static_cast<size_t>(j)] = state;
  }
  state = g.input(Tensor::zeros({h}));
  for (int j = J - 1; j >= 0; --j) {
    state = gru_step(g, store, "enc.bwd", emb[static_cast<size_t>(j)], state);
    bwd[static_cast<size_t>(j)] = state;
  }

  StateSequence seq;
  seq.steps.reserve(static_cast<size_t>(J));
  for (int j = 0; j < J; ++j) {
    const Tensor parts[] = {fwd[static_cast<size_t>(j)], bwd[static_cast<size_t>(j)]};
    seq.steps.push_back(g.concat(parts));
  }
  seq.stacked = g.stack(seq.steps);
  return seq;
}

Tensor decoder_init(Graph& g, const ParameterStore& store, const StateSequence& enc) {
  return g.tanh(g.add(g.matmul(g.param(store, "dec.init.W"), enc.steps.back()),
                      g.param(store, "dec.init.b")));
}

DecoderStep decoder_step(Graph& g, const ParameterStore& store, const ModelConfig& cfg,
                         const AttentionMemory& mem, const Tensor& s_prev, int prev_token) {
  if (prev_token < 0 || prev_token >= cfg.tgt_vocab_size)
    throw RuntimeError(strfmt("decoder: token id %d out of vocabulary range [0, %d)", prev_token,
                              cfg.tgt_vocab_size));
  const Tensor e = g.embed(g.param(store, "tgt_embed.E"), prev_token);
  const AttentionRead att = attend(g, store, "dec.att", s_prev, e, mem);
  const Tensor parts[] = {e, att.context};
  const Tensor s = gru_step(g, store, "dec.gru", g.concat(parts), s_prev);
  const Tensor readout_in[] = {s, att.context, e};
  const Tensor t = g.tanh(g.add(g.matmul(g.param(store, "dec.out.W_t"), g.concat(readout_in)),
                                g.param(store, "dec.out.b_t")));
  DecoderStep step;
  step.state = s;
  step.context = att.context;
  step.logits = g.add(g.matmul(g.param(store, "dec.out.W_o"), t), g.param(store, "dec.out.b_o"));
  step.att_weights = att.weights;
  return step;
}

TeacherForcedResult decode_teacher_forced(Graph& g, const ParameterStore& store, const ModelConfig& cfg,
                                          const StateSequence& enc, std::span<const int> tgt_ids) {
  if (tgt_ids.empty()) throw RuntimeError("decode: empty target");
  if (tgt_ids.back() != Vocabulary::kEos) throw RuntimeError("decode: target must end with EOS");

  const AttentionMemory mem = attention_memory(g, store, "dec.att", enc);
  TeacherForcedResult out;
  Tensor s = decoder_init(g, store, enc);
  Tensor total;
  int prev = Vocabulary::kBos;
  for (size_t i = 0; i < tgt_ids.size(); ++i) {
    const DecoderStep step = decoder_step(g, store, cfg, mem, s, prev);
    const Tensor step_nll = g.nll_onehot(step.logits, tgt_ids[i]);
    out.step_logprobs.push_back(-step_nll.item());
    out.attention.push_back(step.att_weights.values);
    out.states.steps.push_back(step.state);
    total = i == 0 ? step_nll : g.add(total, step_nll);
    s = step.state;
    prev = tgt_ids[i];
  }
  out.states.stacked = g.stack(out.states.steps);
  out.nll = total;
  return out;
}

Tensor likelihood_loss(Graph& g, const ParameterStore& store, const ModelConfig& cfg,
                       std::span<const std::vector<int>> src_batch,
                       std::span<const std::vector<int>> tgt_batch) {
  if (src_batch.empty()) throw RuntimeError("likelihood_loss: empty batch");
  if (src_batch.size() != tgt_batch.size())
    throw RuntimeError("likelihood_loss: source and target batch sizes differ");
  Tensor total;
  for (size_t b = 0; b < src_batch.size(); ++b) {
    const StateSequence enc = encode(g, store, cfg, src_batch[b]);
    const Tensor nll = decode_teacher_forced(g, store, cfg, enc, tgt_batch[b]).nll;
    total = b == 0 ? nll : g.add(total, nll);
  }
  return g.scale(total, 1.0 / static_cast<double>(src_batch.size()));
}

}  // namespace pdnmt
