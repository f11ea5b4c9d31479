#include "pdnmt/decoding.hpp"

#include <algorithm>
#include <cmath>

#include "pdnmt/corpus.hpp"
#include "pdnmt/dp.hpp"
#include "pdnmt/error.hpp"
#include "pdnmt/kernels.hpp"
#include "pdnmt/reconstructor.hpp"
#include "pdnmt/vocab.hpp"

namespace pdnmt {

namespace {

struct Hypothesis {
  Tensor state;
  int prev = Vocabulary::kBos;
  std::vector<int> tokens;
  double loglik = 0.0;
};

bool tokens_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

NBestList beam_search(const ParameterStore& store, const ModelConfig& cfg, std::span<const int> src_ids,
                      int beam, int max_len) {
  if (beam < 1) throw RuntimeError("beam_search: beam must be at least 1");
  if (max_len < 1) throw RuntimeError("beam_search: max_len must be at least 1");

  Graph g;
  const StateSequence enc = encode(g, store, cfg, src_ids);
  const AttentionMemory mem = attention_memory(g, store, "dec.att", enc);

  std::vector<Hypothesis> live(1);
  live[0].state = decoder_init(g, store, enc);

  NBestList out;
  out.source_ids.assign(src_ids.begin(), src_ids.end());

  struct Expansion {
    double score;      // raw summed loglik including this token
    int hyp;
    int token;
  };

  std::vector<Candidate> finished;
  std::vector<double> logp(static_cast<size_t>(cfg.tgt_vocab_size));

  for (int step = 0; step < max_len && !live.empty(); ++step) {
    std::vector<Expansion> expansions;
    expansions.reserve(live.size() * static_cast<size_t>(cfg.tgt_vocab_size));
    std::vector<DecoderStep> steps;
    steps.reserve(live.size());
    for (size_t hi = 0; hi < live.size(); ++hi) {
      steps.push_back(decoder_step(g, store, cfg, mem, live[hi].state, live[hi].prev));
      kernels::log_softmax_row(steps[hi].logits.values.data(), logp.data(), cfg.tgt_vocab_size);
      for (int v = 0; v < cfg.tgt_vocab_size; ++v)
        expansions.push_back({live[hi].loglik + logp[static_cast<size_t>(v)], static_cast<int>(hi), v});
    }
    // Length-normalized pruning; every expansion shares one length here, so
    // the raw score gives the same order, and ties go to smaller token ids.
    const int keep = std::min<int>(beam, static_cast<int>(expansions.size()));
    std::partial_sort(expansions.begin(), expansions.begin() + keep, expansions.end(),
                      [](const Expansion& a, const Expansion& b) {
                        if (a.score != b.score) return a.score > b.score;
                        if (a.token != b.token) return a.token < b.token;
                        return a.hyp < b.hyp;
                      });

    std::vector<Hypothesis> next;
    for (int k = 0; k < keep; ++k) {
      const Expansion& ex = expansions[static_cast<size_t>(k)];
      if (ex.token == Vocabulary::kEos) {
        Candidate c;
        c.tokens = live[static_cast<size_t>(ex.hyp)].tokens;
        c.tokens.push_back(Vocabulary::kEos);
        c.loglik = ex.score;
        c.combined = c.loglik;
        finished.push_back(std::move(c));
      } else if (static_cast<int>(finished.size() + next.size()) < beam) {
        Hypothesis h;
        h.state = steps[static_cast<size_t>(ex.hyp)].state;
        // The recorded decoder step consumed prev, so re-run is not needed;
        // the next step reads this hypothesis' own state and token.
        h.prev = ex.token;
        h.tokens = live[static_cast<size_t>(ex.hyp)].tokens;
        h.tokens.push_back(ex.token);
        h.loglik = ex.score;
        next.push_back(std::move(h));
      }
    }
    if (static_cast<int>(finished.size()) >= beam) {
      live.clear();
      break;
    }
    live = std::move(next);
  }

  if (finished.empty()) {
    // Nothing finished within max_len: close the best live hypothesis.
    if (live.empty()) throw RuntimeError("beam_search: no hypotheses survived");
    auto best = std::min_element(live.begin(), live.end(), [](const Hypothesis& a, const Hypothesis& b) {
      const double na = a.loglik / static_cast<double>(a.tokens.size() + 1);
      const double nb = b.loglik / static_cast<double>(b.tokens.size() + 1);
      if (na != nb) return na > nb;
      return tokens_less(a.tokens, b.tokens);
    });
    Candidate c;
    c.tokens = best->tokens;
    c.tokens.push_back(Vocabulary::kEos);
    c.loglik = best->loglik;
    c.combined = c.loglik;
    c.unfinished = true;
    finished.push_back(std::move(c));
  }

  std::sort(finished.begin(), finished.end(), [](const Candidate& a, const Candidate& b) {
    if (a.loglik != b.loglik) return a.loglik > b.loglik;
    return tokens_less(a.tokens, b.tokens);
  });
  if (static_cast<int>(finished.size()) > beam) finished.resize(static_cast<size_t>(beam));
  out.candidates = std::move(finished);
  return out;
}

int rerank(const ParameterStore& store, const ModelConfig& cfg, NBestList& nbest,
           const RerankOptions& opt) {
  if (cfg.mode == ReconstructorMode::None)
    throw RuntimeError("rerank: the model has no reconstructor");
  if (nbest.annotated_ids.empty())
    throw RuntimeError("rerank: annotated source is required");
  if (nbest.candidates.empty()) throw RuntimeError("rerank: empty candidate list");

  for (Candidate& cand : nbest.candidates) {
    Graph g;
    const StateSequence enc = encode(g, store, cfg, nbest.source_ids);
    const TeacherForcedResult tf = decode_teacher_forced(g, store, cfg, enc, cand.tokens);
    double logrec = 0.0;
    std::optional<double> dp_score;
    if (cfg.mode == ReconstructorMode::Shared) {
      const ReconstructionOutput rec =
          reconstruct_shared(g, store, cfg, nbest.annotated_ids, enc, tf.states, cfg.variant);
      logrec = rec.log_score;
      if (opt.mu != 0.0 && cfg.joint_prediction && !nbest.marker_positions.empty()) {
        std::vector<std::vector<double>> states;
        for (const Tensor& s : rec.states.steps) states.push_back(s.values);
        double conf = 0.0;
        for (const DPPrediction& p : predict_dp_words(states, nbest.marker_positions, store))
          conf += std::log(p.probs[static_cast<size_t>(p.word_id)]);
        dp_score = conf;
      }
    } else {
      const auto [rec_enc, rec_dec] =
          reconstruct_separate(g, store, cfg, nbest.annotated_ids, enc, tf.states);
      logrec = rec_enc.log_score + rec_dec.log_score;
    }
    if (opt.length_normalize_rec) logrec /= static_cast<double>(nbest.annotated_ids.size());
    cand.logrec = logrec;
    cand.dp_score = dp_score;
    cand.combined = cand.loglik + opt.lambda * logrec + (dp_score ? opt.mu * *dp_score : 0.0);
  }

  std::sort(nbest.candidates.begin(), nbest.candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.combined != b.combined) return a.combined > b.combined;
    if (a.loglik != b.loglik) return a.loglik > b.loglik;  // ties toward likelihood
    return tokens_less(a.tokens, b.tokens);
  });
  return 0;
}

std::vector<int> greedy_translate(const ParameterStore& store, const ModelConfig& cfg,
                                  std::span<const int> src_ids, int max_len) {
  const NBestList nbest = beam_search(store, cfg, src_ids, 1, max_len);
  std::vector<int> tokens = nbest.candidates.front().tokens;
  tokens.pop_back();  // EOS
  return tokens;
}

std::string nbest_to_lines(int sentence_index, const NBestList& nbest, const Vocabulary& tgt_vocab) {
  std::string out;
  for (const Candidate& c : nbest.candidates) {
    std::vector<int> tokens = c.tokens;
    if (!tokens.empty() && tokens.back() == Vocabulary::kEos) tokens.pop_back();
    out += strfmt("%d ||| %s ||| %.17g ||| ", sentence_index,
                  join_tokens(tgt_vocab.decode(tokens)).c_str(), c.loglik);
    out += c.logrec ? strfmt("%.17g", *c.logrec) : "-";
    out += strfmt(" ||| %.17g", c.combined);
    out += '\n';
  }
  return out;
}

}  // namespace pdnmt
