// Dropped-pronoun machinery: the jointly trained word predictor that reads
// reconstructor states at marker timesteps, the standalone position tagger
// used to annotate test input, and the frequency baseline it is compared
// against.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "pdnmt/corpus.hpp"
#include "pdnmt/nmt.hpp"
#include "pdnmt/vocab.hpp"

namespace pdnmt {

// Source-language pronoun inventory. Id 0 is <unk>; the rest keep the order
// they were added in.
class PronounVocabulary {
 public:
  static constexpr int kUnk = 0;

  PronounVocabulary();
  explicit PronounVocabulary(const std::vector<std::string>& pronouns);

  int add(const std::string& token);
  int id(const std::string& token) const;  // <unk> fallback
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  void save(const std::string& path) const;
  static PronounVocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct DPPrediction {
  int position = 0;                // marker index into the annotated sentence
  std::vector<double> probs;       // over the pronoun vocabulary, sums to 1
  int word_id = 0;                 // argmax, ties to the lowest id
};

// Softmax head over reconstructor states at the marker timesteps. Pure
// inference on plain state vectors; position p addresses the step whose
// predicted token is the marker.
std::vector<DPPrediction> predict_dp_words(const std::vector<std::vector<double>>& rec_states,
                                           std::span<const int> positions, const ParameterStore& store);

// In-graph counterpart used by the joint objective: sum over markers of the
// gold-word NLL for one sentence. Returns an empty optional for D = 0.
std::optional<Tensor> dp_loss_sentence(Graph& g, const ParameterStore& store,
                                       const StateSequence& rec_states, std::span<const int> positions,
                                       std::span<const int> gold_ids);

// -sum_d log p(dp_d), averaged over sentences; D = 0 sentences contribute 0.
double dp_prediction_loss(const std::vector<std::vector<DPPrediction>>& predictions,
                          const std::vector<std::vector<int>>& gold_ids);

// ---------------------------------------------------------------------------
// Position tagger: a bidirectional GRU over the plain source classifies each
// of the J + 1 boundary slots as insert / keep.

struct TaggerConfig {
  int vocab_size = 0;
  int embed_size = 32;
  int hidden_size = 32;
  int epochs = 6;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double threshold = 0.5;  // strictly-greater comparison
  uint64_t seed = 0;
};

struct TaggerExample {
  std::vector<int> token_ids;    // plain source
  std::vector<char> slot_labels; // length tokens + 1
};

struct TaggerModel {
  TaggerConfig cfg;
  ParameterStore store;
};

TaggerModel make_tagger(const TaggerConfig& cfg);

// Per-slot insert probabilities for one sentence.
std::vector<double> tagger_slot_probs(const TaggerModel& model, std::span<const int> token_ids);

// Trains with per-slot cross entropy; deterministic for a fixed seed.
TaggerModel train_dpp_tagger(const std::vector<TaggerExample>& corpus, const TaggerConfig& cfg);

// Inserts markers at slots whose probability exceeds the threshold. Gold
// words stay unknown (position-only annotation).
AnnotatedSentence tag(const std::vector<std::string>& tokens, const TaggerModel& model,
                      const Vocabulary& vocab);

TaggerExample tagger_example_from_annotation(const AnnotatedSentence& s, const Vocabulary& vocab);

// ---------------------------------------------------------------------------
// Context-free word baseline: predicts the single most frequent gold pronoun
// of the training annotations, everywhere.

class ExternalWordClassifier {
 public:
  void train(const std::vector<AnnotatedSentence>& corpus);
  const std::string& predict() const;
  bool trained() const { return !majority_.empty(); }

 private:
  std::string majority_;
};

}  // namespace pdnmt
