#include "pdnmt/dp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "pdnmt/error.hpp"
#include "pdnmt/kernels.hpp"
#include "pdnmt/rng.hpp"
#include "pdnmt/training.hpp"

namespace pdnmt {

PronounVocabulary::PronounVocabulary() {
  tokens_ = {Vocabulary::unk_token()};
  ids_.emplace(tokens_[0], 0);
}

PronounVocabulary::PronounVocabulary(const std::vector<std::string>& pronouns) : PronounVocabulary() {
  for (const auto& p : pronouns) add(p);
}

int PronounVocabulary::add(const std::string& token) {
  if (token.empty()) throw RuntimeError("pronoun vocabulary: empty token");
  if (ids_.count(token)) throw RuntimeError("pronoun vocabulary: duplicate token '" + token + "'");
  const int id = size();
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

int PronounVocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& PronounVocabulary::token(int id) const {
  if (id < 0 || id >= size())
    throw RuntimeError(strfmt("pronoun vocabulary: id %d out of range [0, %d)", id, size()));
  return tokens_[static_cast<size_t>(id)];
}

void PronounVocabulary::save(const std::string& path) const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  write_file_atomic(path, out);
}

PronounVocabulary PronounVocabulary::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw RuntimeError("cannot read pronoun vocabulary " + path);
  PronounVocabulary v;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line != Vocabulary::unk_token())
        throw RuntimeError(strfmt("%s:1: expected '%s' first", path.c_str(), Vocabulary::unk_token()));
      continue;
    }
    if (line.empty()) throw RuntimeError(strfmt("%s:%d: empty token line", path.c_str(), lineno));
    v.add(line);
  }
  return v;
}

std::vector<DPPrediction> predict_dp_words(const std::vector<std::vector<double>>& rec_states,
                                           std::span<const int> positions, const ParameterStore& store) {
  std::vector<DPPrediction> out;
  if (positions.empty()) return out;
  const Tensor& w = store.at("dp.W");
  const Tensor& b = store.at("dp.b");
  const int vp = w.rows();
  const int h = w.cols();
  std::vector<double> logits(static_cast<size_t>(vp));
  std::vector<double> probs(static_cast<size_t>(vp));
  for (int pos : positions) {
    if (pos < 0 || pos >= static_cast<int>(rec_states.size()))
      throw RuntimeError(strfmt("predict_dp_words: position %d out of range [0, %zu)", pos, rec_states.size()));
    const auto& state = rec_states[static_cast<size_t>(pos)];
    if (static_cast<int>(state.size()) != h)
      throw RuntimeError("predict_dp_words: state width does not match the predictor");
    kernels::gemv(w.values.data(), state.data(), logits.data(), vp, h);
    kernels::add(logits.data(), b.values.data(), logits.data(), vp);
    kernels::softmax_rows(logits.data(), probs.data(), 1, vp);
    DPPrediction pred;
    pred.position = pos;
    pred.probs = probs;
    pred.word_id = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    out.push_back(std::move(pred));
  }
  return out;
}

std::optional<Tensor> dp_loss_sentence(Graph& g, const ParameterStore& store,
                                       const StateSequence& rec_states, std::span<const int> positions,
                                       std::span<const int> gold_ids) {
  if (positions.size() != gold_ids.size())
    throw RuntimeError(strfmt("dp loss: %zu marker positions but %zu gold words", positions.size(),
                              gold_ids.size()));
  if (positions.empty()) return std::nullopt;
  Tensor total;
  for (size_t d = 0; d < positions.size(); ++d) {
    const int pos = positions[d];
    if (pos < 0 || pos >= rec_states.length())
      throw RuntimeError(strfmt("dp loss: position %d out of range [0, %d)", pos, rec_states.length()));
    const Tensor logits = g.add(g.matmul(g.param(store, "dp.W"), rec_states.steps[static_cast<size_t>(pos)]),
                                g.param(store, "dp.b"));
    const Tensor nll = g.nll_onehot(logits, gold_ids[d]);
    total = d == 0 ? nll : g.add(total, nll);
  }
  return total;
}

double dp_prediction_loss(const std::vector<std::vector<DPPrediction>>& predictions,
                          const std::vector<std::vector<int>>& gold_ids) {
  if (predictions.size() != gold_ids.size())
    throw RuntimeError("dp_prediction_loss: prediction and gold batch sizes differ");
  if (predictions.empty()) throw RuntimeError("dp_prediction_loss: empty batch");
  double total = 0.0;
  for (size_t s = 0; s < predictions.size(); ++s) {
    if (predictions[s].size() != gold_ids[s].size())
      throw RuntimeError(strfmt("dp_prediction_loss: sentence %zu has %zu predictions but %zu gold words",
                                s, predictions[s].size(), gold_ids[s].size()));
    for (size_t d = 0; d < predictions[s].size(); ++d) {
      const int gold = gold_ids[s][d];
      const auto& probs = predictions[s][d].probs;
      if (gold < 0 || gold >= static_cast<int>(probs.size()))
        throw RuntimeError(strfmt("dp_prediction_loss: gold id %d out of range", gold));
      total += -std::log(probs[static_cast<size_t>(gold)]);
    }
  }
  return total / static_cast<double>(predictions.size());
}

// ---------------------------------------------------------------------------

namespace {

// Slot i is described by the forward state over tokens < i and the backward
// state over tokens >= i; a two-class readout scores insert vs keep.
struct TaggerPass {
  std::vector<Tensor> slot_logits;  // each [2]
};

TaggerPass tagger_forward(Graph& g, const ParameterStore& store, const TaggerConfig& cfg,
                          std::span<const int> token_ids) {
  const int J = static_cast<int>(token_ids.size());
  const Tensor table = g.param(store, "tag.embed.E");
  std::vector<Tensor> emb;
  emb.reserve(static_cast<size_t>(J));
  for (int id : token_ids) emb.push_back(g.embed(table, id));

  const int h = cfg.hidden_size;
  std::vector<Tensor> fwd(static_cast<size_t>(J) + 1), bwd(static_cast<size_t>(J) + 1);
  fwd[0] = g.input(Tensor::zeros({h}));
  for (int j = 0; j < J; ++j)
    fwd[static_cast<size_t>(j) + 1] = gru_step(g, store, "tag.fwd", emb[static_cast<size_t>(j)], fwd[static_cast<size_t>(j)]);
  bwd[static_cast<size_t>(J)] = g.input(Tensor::zeros({h}));
  for (int j = J - 1; j >= 0; --j)
    bwd[static_cast<size_t>(j)] = gru_step(g, store, "tag.bwd", emb[static_cast<size_t>(j)], bwd[static_cast<size_t>(j) + 1]);

  TaggerPass pass;
  for (int i = 0; i <= J; ++i) {
    const Tensor parts[] = {fwd[static_cast<size_t>(i)], bwd[static_cast<size_t>(i)]};
    const Tensor rep = g.concat(parts);
    pass.slot_logits.push_back(
        g.add(g.matmul(g.param(store, "tag.W"), rep), g.param(store, "tag.b")));
  }
  return pass;
}

}  // namespace

TaggerModel make_tagger(const TaggerConfig& cfg) {
  if (cfg.vocab_size < 6) throw ConfigError("tagger: vocab_size must cover the reserved tokens");
  TaggerModel model;
  model.cfg = cfg;
  const int e = cfg.embed_size;
  const int h = cfg.hidden_size;
  model.store.create_uniform("tag.embed.E", {cfg.vocab_size, e}, Partition::Theta, cfg.seed);
  for (const char* dir : {"fwd", "bwd"}) {
    const std::string prefix = std::string("tag.") + dir;
    for (const char* gate : {"z", "r", "h"}) {
      model.store.create_uniform(prefix + ".W_" + gate, {h, e}, Partition::Theta, cfg.seed);
      model.store.create_uniform(prefix + ".U_" + gate, {h, h}, Partition::Theta, cfg.seed);
      model.store.create_zeros(prefix + ".b_" + gate, {h}, Partition::Theta);
    }
  }
  model.store.create_uniform("tag.W", {2, 2 * h}, Partition::Theta, cfg.seed);
  model.store.create_zeros("tag.b", {2}, Partition::Theta);
  return model;
}

std::vector<double> tagger_slot_probs(const TaggerModel& model, std::span<const int> token_ids) {
  Graph g;
  const TaggerPass pass = tagger_forward(g, model.store, model.cfg, token_ids);
  std::vector<double> probs;
  probs.reserve(pass.slot_logits.size());
  double soft[2];
  for (const Tensor& logits : pass.slot_logits) {
    kernels::softmax_rows(logits.values.data(), soft, 1, 2);
    probs.push_back(soft[1]);
  }
  return probs;
}

TaggerModel train_dpp_tagger(const std::vector<TaggerExample>& corpus, const TaggerConfig& cfg) {
  if (corpus.empty()) throw RuntimeError("train_dpp_tagger: empty corpus");
  for (const auto& ex : corpus)
    if (ex.slot_labels.size() != ex.token_ids.size() + 1)
      throw RuntimeError("train_dpp_tagger: slot labels must cover tokens + 1 boundaries");

  TaggerModel model = make_tagger(cfg);
  Adam adam;
  AdamConfig acfg;
  acfg.learning_rate = cfg.learning_rate;

  const int n = static_cast<int>(corpus.size());
  const int batches = (n + cfg.batch_size - 1) / cfg.batch_size;
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle(cfg.seed, 0x7a66ull + static_cast<uint64_t>(epoch));
    for (int i = n - 1; i > 0; --i) std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(shuffle.below(static_cast<uint32_t>(i + 1)))]);
    for (int b = 0; b < batches; ++b) {
      Graph g;
      Tensor total;
      int count = 0;
      for (int k = b * cfg.batch_size; k < std::min(n, (b + 1) * cfg.batch_size); ++k) {
        const TaggerExample& ex = corpus[static_cast<size_t>(order[static_cast<size_t>(k)])];
        const TaggerPass pass = tagger_forward(g, model.store, cfg, ex.token_ids);
        for (size_t s = 0; s < pass.slot_logits.size(); ++s) {
          const Tensor nll = g.nll_onehot(pass.slot_logits[s], ex.slot_labels[s] ? 1 : 0);
          total = count == 0 ? nll : g.add(total, nll);
          ++count;
        }
      }
      const Tensor loss = g.scale(total, 1.0 / static_cast<double>(count));
      if (!std::isfinite(loss.item())) throw RuntimeError("train_dpp_tagger: loss diverged");
      adam.step(model.store, g.backward(loss, model.store), acfg);
    }
  }
  return model;
}

AnnotatedSentence tag(const std::vector<std::string>& tokens, const TaggerModel& model,
                      const Vocabulary& vocab) {
  const std::vector<int> ids = vocab.encode(tokens);
  const std::vector<double> probs = tagger_slot_probs(model, ids);
  AnnotatedSentence out;
  out.tokens = tokens;
  int inserted = 0;
  for (size_t slot = 0; slot < probs.size(); ++slot) {
    if (probs[slot] > model.cfg.threshold) {
      const int pos = static_cast<int>(slot) + inserted;
      out.tokens.insert(out.tokens.begin() + pos, Vocabulary::dp_marker_token());
      out.dp_entries.push_back({pos, std::string()});
      ++inserted;
    }
  }
  out.validate();
  return out;
}

TaggerExample tagger_example_from_annotation(const AnnotatedSentence& s, const Vocabulary& vocab) {
  auto [plain, entries] = strip_annotation(s);
  TaggerExample ex;
  ex.token_ids = vocab.encode(plain);
  ex.slot_labels.assign(plain.size() + 1, 0);
  for (const auto& e : entries) ex.slot_labels[static_cast<size_t>(e.position)] = 1;
  return ex;
}

void ExternalWordClassifier::train(const std::vector<AnnotatedSentence>& corpus) {
  std::map<std::string, int> counts;
  for (const auto& s : corpus)
    for (const auto& e : s.dp_entries)
      if (!e.word.empty()) ++counts[e.word];
  if (counts.empty()) throw RuntimeError("external classifier: no gold pronoun words in the corpus");
  // Highest count; lexicographically first on ties (map order).
  int best = -1;
  for (const auto& [word, count] : counts) {
    if (count > best) {
      best = count;
      majority_ = word;
    }
  }
}

const std::string& ExternalWordClassifier::predict() const {
  if (majority_.empty()) throw RuntimeError("external classifier: not trained");
  return majority_;
}

}  // namespace pdnmt
