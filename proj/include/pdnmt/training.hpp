// Joint optimization of the three-term objective: translation likelihood,
// reconstruction, and dropped-pronoun prediction, all negative-log so the
// total is minimized.
#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdnmt/graph.hpp"
#include "pdnmt/model_config.hpp"
#include "pdnmt/nmt.hpp"

namespace pdnmt {

struct LossBreakdown {
  double likelihood = 0.0;
  double reconstruction = 0.0;
  double prediction = 0.0;
  double total = 0.0;
};

// One training sentence, already rendered for the active configuration:
// enc_ids is the encoder input, rec_ids the reconstruction target (empty in
// baseline mode), marker_positions index into rec_ids, gold_dp_ids are
// pronoun-vocabulary ids aligned with the markers.
struct TrainExample {
  std::vector<int> enc_ids;
  std::vector<int> tgt_ids;  // ends with EOS
  std::vector<int> rec_ids;
  std::vector<int> marker_positions;
  std::vector<int> gold_dp_ids;
};

struct JointLossResult {
  LossBreakdown breakdown;
  Tensor total;  // scalar node
};

JointLossResult joint_loss(Graph& g, const ParameterStore& store, const ModelConfig& cfg,
                           std::span<const TrainExample> batch);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 1.0;  // global gradient norm; 0 disables clipping
};

class Adam {
 public:
  void step(ParameterStore& store, const GradientMap& grads, const AdamConfig& cfg);
  void reset() { moments_.clear(); t_ = 0; }

 private:
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };
  std::unordered_map<std::string, Moments> moments_;
  int64_t t_ = 0;
};

struct TrainingConfig {
  AdamConfig adam;
  int batch_size = 16;
  int max_epochs = 10;
  int max_steps = 0;        // 0 = bounded by epochs only
  uint64_t seed = 0;
  bool seed_set = false;    // the seed must be given explicitly
  int checkpoint_every = 0; // steps; 0 = no periodic checkpoints
  int eval_every = 200;     // steps between dev evaluations
  int patience = 5;         // dev evaluations without improvement

  void validate() const;
};

struct TrainResult {
  int steps = 0;
  double best_dev_score = -1.0;
  int best_step = -1;
  bool early_stopped = false;
  std::string loss_log;  // TSV: step, likelihood, reconstruction, prediction, total
};

// Optimizes all partitions jointly. dev_score (when given) is evaluated on
// the configured cadence; the best-scoring parameters are restored at the
// end. on_checkpoint (when given) runs at the checkpoint cadence.
TrainResult train(ParameterStore& store, const ModelConfig& cfg, const TrainingConfig& tcfg,
                  std::span<const TrainExample> train_data,
                  const std::function<double(const ParameterStore&)>& dev_score = {},
                  const std::function<void(const ParameterStore&, int)>& on_checkpoint = {});

// Fraction of teacher-forced steps whose argmax equals the reference token.
double teacher_forced_token_accuracy(const ParameterStore& store, const ModelConfig& cfg,
                                     std::span<const TrainExample> data);

}  // namespace pdnmt
