#include "pdnmt/training.hpp"

#include <algorithm>
#include <cmath>

#include "pdnmt/dp.hpp"
#include "pdnmt/error.hpp"
#include "pdnmt/kernels.hpp"
#include "pdnmt/reconstructor.hpp"
#include "pdnmt/rng.hpp"
#include "pdnmt/vocab.hpp"

namespace pdnmt {

JointLossResult joint_loss(Graph& g, const ParameterStore& store, const ModelConfig& cfg,
                           std::span<const TrainExample> batch) {
  if (batch.empty()) throw RuntimeError("joint_loss: empty batch");
  const bool wants_rec = cfg.mode != ReconstructorMode::None;
  for (const auto& ex : batch) {
    if (wants_rec && ex.rec_ids.empty())
      throw RuntimeError("joint_loss: reconstruction target missing for a sentence (mode " +
                         std::string(to_string(cfg.mode)) + ")");
    if (cfg.joint_prediction && ex.marker_positions.size() != ex.gold_dp_ids.size())
      throw RuntimeError("joint_loss: marker positions and gold pronoun words do not line up");
  }

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  Tensor like_sum, rec_sum, dp_sum;
  bool has_dp = false;

  for (size_t b = 0; b < batch.size(); ++b) {
    const TrainExample& ex = batch[b];
    const StateSequence enc = encode(g, store, cfg, ex.enc_ids);
    const TeacherForcedResult tf = decode_teacher_forced(g, store, cfg, enc, ex.tgt_ids);
    like_sum = b == 0 ? tf.nll : g.add(like_sum, tf.nll);

    if (!wants_rec) continue;
    if (cfg.mode == ReconstructorMode::Shared) {
      const ReconstructionOutput rec =
          reconstruct_shared(g, store, cfg, ex.rec_ids, enc, tf.states, cfg.variant);
      rec_sum = rec_sum.node < 0 ? rec.neg_log_score : g.add(rec_sum, rec.neg_log_score);
      if (cfg.joint_prediction) {
        const auto dp = dp_loss_sentence(g, store, rec.states, ex.marker_positions, ex.gold_dp_ids);
        if (dp.has_value()) {
          dp_sum = has_dp ? g.add(dp_sum, *dp) : *dp;
          has_dp = true;
        }
      }
    } else {
      const auto [rec_enc, rec_dec] = reconstruct_separate(g, store, cfg, ex.rec_ids, enc, tf.states);
      const Tensor both = g.add(rec_enc.neg_log_score, rec_dec.neg_log_score);
      rec_sum = rec_sum.node < 0 ? both : g.add(rec_sum, both);
    }
  }

  JointLossResult out;
  Tensor total = g.scale(like_sum, inv_b);
  out.breakdown.likelihood = total.item();
  if (wants_rec) {
    const Tensor rec_term = g.scale(rec_sum, inv_b);
    out.breakdown.reconstruction = rec_term.item();
    total = g.add(total, rec_term);
  }
  if (has_dp) {
    const Tensor dp_term = g.scale(dp_sum, inv_b);
    out.breakdown.prediction = dp_term.item();
    total = g.add(total, dp_term);
  }
  out.breakdown.total = total.item();
  out.total = total;
  return out;
}

void Adam::step(ParameterStore& store, const GradientMap& grads, const AdamConfig& cfg) {
  // Global norm in name order (GradientMap is sorted), then clip.
  double sq = 0.0;
  for (const auto& [name, g] : grads)
    for (double v : g.values) sq += v * v;
  const double norm = std::sqrt(sq);
  const double clip_scale =
      cfg.clip_norm > 0.0 && norm > cfg.clip_norm ? cfg.clip_norm / norm : 1.0;

  ++t_;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
  for (const auto& [name, g] : grads) {
    Tensor& param = store.at(name);
    Moments& mom = moments_[name];
    if (mom.m.empty()) {
      mom.m.assign(param.values.size(), 0.0);
      mom.v.assign(param.values.size(), 0.0);
    }
    for (size_t i = 0; i < param.values.size(); ++i) {
      const double gi = g.values[i] * clip_scale;
      mom.m[i] = cfg.beta1 * mom.m[i] + (1.0 - cfg.beta1) * gi;
      mom.v[i] = cfg.beta2 * mom.v[i] + (1.0 - cfg.beta2) * gi * gi;
      const double mhat = mom.m[i] / bc1;
      const double vhat = mom.v[i] / bc2;
      param.values[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
  }
}

void TrainingConfig::validate() const {
  if (!seed_set) throw ConfigError("training: a seed is required");
  if (batch_size < 1) throw ConfigError("training: batch_size must be positive");
  if (max_epochs < 1 && max_steps < 1) throw ConfigError("training: need max_epochs or max_steps");
  if (adam.learning_rate < 0.0) throw ConfigError("training: learning rate must be non-negative");
  if (patience < 1) throw ConfigError("training: patience must be positive");
  if (eval_every < 1) throw ConfigError("training: eval_every must be positive");
}

namespace {

std::vector<std::vector<int>> make_batches(std::span<const TrainExample> data, int batch_size) {
  std::vector<int> idx(data.size());
  for (size_t i = 0; i < data.size(); ++i) idx[i] = static_cast<int>(i);
  // Group similar lengths so batches stay homogeneous.
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const auto& ea = data[static_cast<size_t>(a)];
    const auto& eb = data[static_cast<size_t>(b)];
    if (ea.tgt_ids.size() != eb.tgt_ids.size()) return ea.tgt_ids.size() < eb.tgt_ids.size();
    return ea.enc_ids.size() < eb.enc_ids.size();
  });
  std::vector<std::vector<int>> batches;
  for (size_t i = 0; i < idx.size(); i += static_cast<size_t>(batch_size)) {
    std::vector<int> batch;
    for (size_t k = i; k < std::min(idx.size(), i + static_cast<size_t>(batch_size)); ++k)
      batch.push_back(idx[k]);
    batches.push_back(std::move(batch));
  }
  return batches;
}

std::vector<Tensor> snapshot(const ParameterStore& store) {
  std::vector<Tensor> copy;
  for (const auto& name : store.names()) copy.push_back(store.at(name));
  return copy;
}

void restore(ParameterStore& store, const std::vector<Tensor>& copy) {
  size_t i = 0;
  for (const auto& name : store.names()) store.at(name).values = copy[i++].values;
}

}  // namespace

TrainResult train(ParameterStore& store, const ModelConfig& cfg, const TrainingConfig& tcfg,
                  std::span<const TrainExample> train_data,
                  const std::function<double(const ParameterStore&)>& dev_score,
                  const std::function<void(const ParameterStore&, int)>& on_checkpoint) {
  tcfg.validate();
  if (train_data.empty()) throw RuntimeError("train: empty corpus");

  auto batches = make_batches(train_data, tcfg.batch_size);
  Adam adam;
  TrainResult result;
  result.loss_log = "step\tlikelihood\treconstruction\tprediction\ttotal\n";

  std::vector<Tensor> best_params;
  int evals_since_best = 0;
  bool stop = false;

  std::vector<TrainExample> batch;
  for (int epoch = 0; epoch < tcfg.max_epochs && !stop; ++epoch) {
    // Shuffle batch order from the run seed.
    Rng shuffle(tcfg.seed, 0xba7c4ull + static_cast<uint64_t>(epoch));
    std::vector<int> order(batches.size());
    for (size_t i = 0; i < batches.size(); ++i) order[i] = static_cast<int>(i);
    for (size_t i = batches.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle.below(static_cast<uint32_t>(i))]);

    for (int bi : order) {
      batch.clear();
      for (int k : batches[static_cast<size_t>(bi)]) batch.push_back(train_data[static_cast<size_t>(k)]);

      Graph g;
      const JointLossResult loss = joint_loss(g, store, cfg, batch);
      const int step = result.steps + 1;
      if (!std::isfinite(loss.breakdown.total))
        throw RuntimeError(strfmt("training diverged (non-finite loss) at step %d", step));
      adam.step(store, g.backward(loss.total, store), tcfg.adam);
      result.steps = step;
      result.loss_log += strfmt("%d\t%.10g\t%.10g\t%.10g\t%.10g\n", step, loss.breakdown.likelihood,
                                loss.breakdown.reconstruction, loss.breakdown.prediction,
                                loss.breakdown.total);

      if (on_checkpoint && tcfg.checkpoint_every > 0 && step % tcfg.checkpoint_every == 0)
        on_checkpoint(store, step);

      if (dev_score && step % tcfg.eval_every == 0) {
        const double score = dev_score(store);
        if (score > result.best_dev_score) {
          result.best_dev_score = score;
          result.best_step = step;
          best_params = snapshot(store);
          evals_since_best = 0;
        } else if (++evals_since_best >= tcfg.patience) {
          result.early_stopped = true;
          stop = true;
          break;
        }
      }
      if (tcfg.max_steps > 0 && result.steps >= tcfg.max_steps) {
        stop = true;
        break;
      }
    }
  }

  if (dev_score) {
    // Score the final parameters too, then keep the best.
    const double score = dev_score(store);
    if (score > result.best_dev_score) {
      result.best_dev_score = score;
      result.best_step = result.steps;
    } else if (!best_params.empty()) {
      restore(store, best_params);
    }
  }
  return result;
}

double teacher_forced_token_accuracy(const ParameterStore& store, const ModelConfig& cfg,
                                     std::span<const TrainExample> data) {
  int64_t correct = 0, total = 0;
  for (const auto& ex : data) {
    Graph g;
    const StateSequence enc = encode(g, store, cfg, ex.enc_ids);
    const AttentionMemory mem = attention_memory(g, store, "dec.att", enc);
    Tensor s = decoder_init(g, store, enc);
    int prev = Vocabulary::kBos;
    for (int tgt : ex.tgt_ids) {
      const DecoderStep step = decoder_step(g, store, cfg, mem, s, prev);
      const auto& logits = step.logits.values;
      const int argmax =
          static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
      correct += argmax == tgt ? 1 : 0;
      ++total;
      s = step.state;
      prev = tgt;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace pdnmt
