// pdnmt command line: data generation, annotation, tagging, training,
// translation, reranking, evaluation, gradient checking, and the synthetic
// trend experiment.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "pdnmt/checkpoint.hpp"
#include "pdnmt/config_file.hpp"
#include "pdnmt/corpus.hpp"
#include "pdnmt/decoding.hpp"
#include "pdnmt/dp.hpp"
#include "pdnmt/error.hpp"
#include "pdnmt/eval.hpp"
#include "pdnmt/experiment.hpp"
#include "pdnmt/grad_check.hpp"
#include "pdnmt/kernels.hpp"
#include "pdnmt/reconstructor.hpp"
#include "pdnmt/synth.hpp"
#include "pdnmt/vocab.hpp"

namespace pdnmt {
namespace {

constexpr uint64_t kTaggerDigest = 0x7a66657231ull;  // fixed marker for tagger checkpoints

struct CommonFlags {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool serial = false;
};

ConfigMap load_config(const CommonFlags& common) {
  ConfigMap cfg;
  if (!common.config_path.empty()) cfg = ConfigMap::parse_file(common.config_path);
  return cfg;
}

void apply_backend(const CommonFlags& common) {
  kernels::set_backend(common.serial ? kernels::Backend::Serial : kernels::Backend::OpenMP);
  if (common.threads > 0) kernels::set_threads(common.threads);
}

uint64_t require_seed(const CommonFlags& common) {
  if (!common.seed_set) throw ConfigError("--seed is required");
  return common.seed;
}

void add_common(CLI::App* cmd, CommonFlags& common) {
  cmd->add_option("--config", common.config_path, "key = value configuration file");
  cmd->add_option("--seed", common.seed, "random seed")->each([&common](const std::string&) {
    common.seed_set = true;
  });
  cmd->add_option("--threads", common.threads, "kernel threads (0 = library default)");
  cmd->add_flag("--serial", common.serial, "use the serial kernel backend");
}

// ---------------------------------------------------------------------------

void save_gold_annotations(const Corpus& corpus, const std::string& tokens_path,
                           const std::string& sidecar_path) {
  std::vector<AnnotatedSentence> annotations;
  for (const auto& ex : corpus) annotations.push_back(*ex.gold);
  save_annotated(annotations, tokens_path, sidecar_path);
}

int cmd_gen_data(const CommonFlags& common, ConfigMap& cfg, const std::string& out_dir) {
  const uint64_t seed = require_seed(common);
  const GeneratorConfig gen = generator_from_config(cfg);
  cfg.reject_unknown();
  std::filesystem::create_directories(out_dir);
  const SyntheticCorpus corpus = generate_synthetic_corpus(gen, seed);

  auto dump = [&](const Corpus& split, const std::string& name) {
    const std::string p = out_dir + "/" + name;
    save_corpus(split, p + ".src", p + ".tgt", p + ".align");
    save_gold_annotations(split, p + ".annotated", p + ".annotated.tsv");
  };
  dump(corpus.train, "train");
  dump(corpus.dev, "dev");
  dump(corpus.test, "test");
  corpus.lexicon.save(out_dir + "/lexicon.txt");

  std::vector<std::vector<std::string>> src_sentences, tgt_sentences;
  for (const auto& ex : corpus.train) {
    src_sentences.push_back(ex.gold->tokens_with_words());
    tgt_sentences.push_back(ex.target);
  }
  Vocabulary::build(src_sentences).save(out_dir + "/src.vocab");
  Vocabulary::build(tgt_sentences).save(out_dir + "/tgt.vocab");
  PronounVocabulary(corpus.source_pronouns).save(out_dir + "/pronoun.vocab");
  std::printf("wrote synthetic corpus (%d/%d/%d) to %s\n", gen.train_size, gen.dev_size, gen.test_size,
              out_dir.c_str());
  return 0;
}

int cmd_annotate(const std::string& src, const std::string& tgt, const std::string& align,
                 const std::string& lexicon_path, const std::string& out_tokens,
                 const std::string& out_sidecar) {
  const Corpus corpus = load_corpus(src, tgt, align);
  const PronounLexicon lexicon = PronounLexicon::load(lexicon_path);
  std::vector<AnnotatedSentence> annotations;
  annotations.reserve(corpus.size());
  for (const auto& ex : corpus) annotations.push_back(annotate_from_alignment(ex, lexicon));
  save_annotated(annotations, out_tokens, out_sidecar);
  std::printf("annotated %zu sentences\n", corpus.size());
  return 0;
}

int cmd_tag(const CommonFlags& common, const std::string& train_tokens, const std::string& train_sidecar,
            const std::string& model_in, const std::string& model_out, const std::string& vocab_path,
            const std::string& input, const std::string& out_tokens, const std::string& out_sidecar,
            int epochs) {
  const Vocabulary vocab = Vocabulary::load(vocab_path);
  TaggerModel model;
  if (!model_in.empty()) {
    model.store = load_checkpoint(model_in, kTaggerDigest);
    model.cfg.vocab_size = model.store.at("tag.embed.E").rows();
    model.cfg.embed_size = model.store.at("tag.embed.E").cols();
    model.cfg.hidden_size = model.store.at("tag.fwd.U_z").rows();
  } else {
    if (train_tokens.empty()) throw ConfigError("tag: need --train-annotated or --model");
    const auto annotations = load_annotated(train_tokens, train_sidecar);
    std::vector<TaggerExample> data;
    data.reserve(annotations.size());
    for (const auto& s : annotations) data.push_back(tagger_example_from_annotation(s, vocab));
    TaggerConfig tcfg;
    tcfg.vocab_size = vocab.size();
    tcfg.seed = require_seed(common);
    if (epochs > 0) tcfg.epochs = epochs;
    model = train_dpp_tagger(data, tcfg);
    if (!model_out.empty()) save_checkpoint(model_out, model.store, kTaggerDigest);
  }
  if (!input.empty()) {
    const auto sentences = load_tokens(input);
    std::vector<AnnotatedSentence> tagged;
    tagged.reserve(sentences.size());
    for (const auto& s : sentences) tagged.push_back(tag(s, model, vocab));
    save_annotated(tagged, out_tokens, out_sidecar);
    std::printf("tagged %zu sentences\n", sentences.size());
  }
  return 0;
}

std::vector<TrainExample> render_training_data(const ModelConfig& mcfg, const Vocabulary& src_vocab,
                                               const Vocabulary& tgt_vocab,
                                               const PronounVocabulary& pron_vocab,
                                               const std::vector<std::vector<std::string>>* plain_src,
                                               const std::vector<AnnotatedSentence>* annotated,
                                               const std::vector<std::vector<std::string>>& targets) {
  std::vector<TrainExample> out;
  const size_t n = targets.size();
  for (size_t i = 0; i < n; ++i) {
    TrainExample ex;
    if (mcfg.mode == ReconstructorMode::None) {
      const auto& tokens = annotated ? (*annotated)[i].tokens : (*plain_src)[i];
      ex.enc_ids = src_vocab.encode(tokens);
    } else if (mcfg.mode == ReconstructorMode::Shared) {
      const auto& s = (*annotated)[i];
      ex.enc_ids = src_vocab.encode(s.tokens);
      ex.rec_ids = ex.enc_ids;
      for (const auto& e : s.dp_entries) {
        ex.marker_positions.push_back(e.position);
        ex.gold_dp_ids.push_back(pron_vocab.id(e.word.empty() ? Vocabulary::unk_token() : e.word));
      }
    } else {
      const auto& s = (*annotated)[i];
      const auto words = s.tokens_with_words();
      ex.enc_ids = src_vocab.encode(words);
      ex.rec_ids = ex.enc_ids;
    }
    ex.tgt_ids = tgt_vocab.encode(targets[i]);
    ex.tgt_ids.push_back(Vocabulary::kEos);
    out.push_back(std::move(ex));
  }
  return out;
}

int cmd_train(const CommonFlags& common, ConfigMap& cfg, const std::string& train_src,
              const std::string& train_tgt, const std::string& train_annotated,
              const std::string& train_sidecar, const std::string& dev_src, const std::string& dev_tgt,
              const std::string& src_vocab_path, const std::string& tgt_vocab_path,
              const std::string& pron_vocab_path, const std::string& out_dir) {
  ModelConfig mcfg = model_from_config(cfg);
  TrainingConfig tcfg = training_from_config(cfg);
  cfg.reject_unknown();
  tcfg.seed = require_seed(common);
  tcfg.seed_set = true;

  const Vocabulary src_vocab = Vocabulary::load(src_vocab_path);
  const Vocabulary tgt_vocab = Vocabulary::load(tgt_vocab_path);
  PronounVocabulary pron_vocab;
  if (!pron_vocab_path.empty()) pron_vocab = PronounVocabulary::load(pron_vocab_path);
  if (mcfg.src_vocab_size == 0) mcfg.src_vocab_size = src_vocab.size();
  if (mcfg.tgt_vocab_size == 0) mcfg.tgt_vocab_size = tgt_vocab.size();
  if (mcfg.joint_prediction && mcfg.pronoun_vocab_size == 0) mcfg.pronoun_vocab_size = pron_vocab.size();
  mcfg.validate();

  const auto targets = load_tokens(train_tgt);
  std::vector<std::vector<std::string>> plain_src;
  std::vector<AnnotatedSentence> annotated;
  if (!train_annotated.empty()) {
    annotated = load_annotated(train_annotated, train_sidecar);
    if (annotated.size() != targets.size())
      throw RuntimeError("train: annotated source and target line counts differ");
  } else {
    if (mcfg.mode != ReconstructorMode::None)
      throw ConfigError("train: the reconstructor needs --train-annotated data");
    plain_src = load_tokens(train_src);
    if (plain_src.size() != targets.size())
      throw RuntimeError("train: source and target line counts differ");
  }
  const auto data = render_training_data(mcfg, src_vocab, tgt_vocab, pron_vocab,
                                         plain_src.empty() ? nullptr : &plain_src,
                                         annotated.empty() ? nullptr : &annotated, targets);

  std::function<double(const ParameterStore&)> dev_score;
  std::vector<std::vector<std::string>> dev_inputs, dev_refs;
  if (!dev_src.empty()) {
    dev_inputs = load_tokens(dev_src);
    dev_refs = load_tokens(dev_tgt);
    if (dev_inputs.size() != dev_refs.size())
      throw RuntimeError("train: dev source and target line counts differ");
    dev_score = [&](const ParameterStore& store) {
      std::vector<std::vector<std::string>> hyps(dev_inputs.size());
#pragma omp parallel for schedule(dynamic)
      for (int64_t i = 0; i < static_cast<int64_t>(dev_inputs.size()); ++i) {
        const auto ids = greedy_translate(store, mcfg, src_vocab.encode(dev_inputs[static_cast<size_t>(i)]),
                                          kMaxSentenceLen + 2);
        hyps[static_cast<size_t>(i)] = tgt_vocab.decode(ids);
      }
      return bleu(hyps, dev_refs).bleu;
    };
  }

  std::filesystem::create_directories(out_dir);
  ParameterStore store;
  init_parameters(store, mcfg, tcfg.seed);
  auto on_checkpoint = [&](const ParameterStore& s, int step) {
    save_checkpoint(out_dir + "/checkpoint_step" + std::to_string(step) + ".bin", s, mcfg.digest());
  };
  const TrainResult result = train(store, mcfg, tcfg, data, dev_score, on_checkpoint);
  save_checkpoint(out_dir + "/checkpoint.bin", store, mcfg.digest());
  write_file_atomic(out_dir + "/loss_log.tsv", result.loss_log);
  std::printf("trained %d steps", result.steps);
  if (result.best_step >= 0) std::printf(", best dev BLEU %.2f at step %d", result.best_dev_score, result.best_step);
  std::printf("\n");
  return 0;
}

ModelConfig config_for_checkpoint(ConfigMap& cfg, const Vocabulary& src_vocab, const Vocabulary& tgt_vocab,
                                  const PronounVocabulary* pron_vocab) {
  ModelConfig mcfg = model_from_config(cfg);
  if (mcfg.src_vocab_size == 0) mcfg.src_vocab_size = src_vocab.size();
  if (mcfg.tgt_vocab_size == 0) mcfg.tgt_vocab_size = tgt_vocab.size();
  if (mcfg.joint_prediction && mcfg.pronoun_vocab_size == 0 && pron_vocab)
    mcfg.pronoun_vocab_size = pron_vocab->size();
  mcfg.validate();
  return mcfg;
}

int cmd_translate(const CommonFlags& common, ConfigMap& cfg, const std::string& input,
                  const std::string& checkpoint, const std::string& src_vocab_path,
                  const std::string& tgt_vocab_path, const std::string& out,
                  const std::string& nbest_out, int beam, int max_len, bool greedy) {
  (void)common;
  const Vocabulary src_vocab = Vocabulary::load(src_vocab_path);
  const Vocabulary tgt_vocab = Vocabulary::load(tgt_vocab_path);
  const ModelConfig mcfg = config_for_checkpoint(cfg, src_vocab, tgt_vocab, nullptr);
  cfg.reject_unknown();
  const ParameterStore store = load_checkpoint(checkpoint, mcfg.digest());

  if (greedy) beam = 1;
  const auto sentences = load_tokens(input);
  std::vector<NBestList> lists(sentences.size());
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < static_cast<int64_t>(sentences.size()); ++i)
    lists[static_cast<size_t>(i)] =
        beam_search(store, mcfg, src_vocab.encode(sentences[static_cast<size_t>(i)]), beam, max_len);

  std::string out_text, nbest_text;
  for (size_t i = 0; i < lists.size(); ++i) {
    std::vector<int> ids = lists[i].candidates.front().tokens;
    ids.pop_back();
    out_text += join_tokens(tgt_vocab.decode(ids));
    out_text += '\n';
    if (!nbest_out.empty()) nbest_text += nbest_to_lines(static_cast<int>(i), lists[i], tgt_vocab);
  }
  write_file_atomic(out, out_text);
  if (!nbest_out.empty()) write_file_atomic(nbest_out, nbest_text);
  std::printf("translated %zu sentences\n", sentences.size());
  return 0;
}

std::vector<NBestList> parse_nbest_file(const std::string& path, const Vocabulary& tgt_vocab,
                                        size_t sentence_count) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw RuntimeError("cannot read n-best file " + path);
  std::vector<NBestList> lists(sentence_count);
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    size_t pos = 0;
    while (true) {
      const size_t sep = line.find(" ||| ", pos);
      if (sep == std::string::npos) {
        fields.push_back(line.substr(pos));
        break;
      }
      fields.push_back(line.substr(pos, sep - pos));
      pos = sep + 5;
    }
    if (fields.size() != 5)
      throw RuntimeError(strfmt("%s:%d: expected 5 ||| fields", path.c_str(), lineno));
    const int idx = std::stoi(fields[0]);
    if (idx < 0 || idx >= static_cast<int>(sentence_count))
      throw RuntimeError(strfmt("%s:%d: sentence index %d out of range", path.c_str(), lineno, idx));
    Candidate c;
    c.tokens = tgt_vocab.encode(split_tokens(fields[1]));
    c.tokens.push_back(Vocabulary::kEos);
    c.loglik = std::stod(fields[2]);
    if (fields[3] != "-") c.logrec = std::stod(fields[3]);
    c.combined = std::stod(fields[4]);
    lists[static_cast<size_t>(idx)].candidates.push_back(std::move(c));
  }
  return lists;
}

int cmd_rerank(const CommonFlags& common, ConfigMap& cfg, const std::string& input,
               const std::string& annotated_tokens, const std::string& annotated_sidecar,
               const std::string& nbest_in, const std::string& checkpoint,
               const std::string& src_vocab_path, const std::string& tgt_vocab_path,
               const std::string& pron_vocab_path, const std::string& out,
               const std::string& nbest_out, double lambda, double mu) {
  (void)common;
  const Vocabulary src_vocab = Vocabulary::load(src_vocab_path);
  const Vocabulary tgt_vocab = Vocabulary::load(tgt_vocab_path);
  PronounVocabulary pron_vocab;
  if (!pron_vocab_path.empty()) pron_vocab = PronounVocabulary::load(pron_vocab_path);
  const ModelConfig mcfg = config_for_checkpoint(cfg, src_vocab, tgt_vocab,
                                                 pron_vocab_path.empty() ? nullptr : &pron_vocab);
  cfg.reject_unknown();
  if (mcfg.mode == ReconstructorMode::None)
    throw ConfigError("rerank: the model configuration has no reconstructor");
  const ParameterStore store = load_checkpoint(checkpoint, mcfg.digest());

  const auto inputs = load_tokens(input);
  const auto annotated = load_annotated(annotated_tokens, annotated_sidecar);
  if (annotated.size() != inputs.size())
    throw RuntimeError("rerank: annotated and input line counts differ");
  auto lists = parse_nbest_file(nbest_in, tgt_vocab, inputs.size());
  for (size_t i = 0; i < lists.size(); ++i) {
    if (lists[i].candidates.empty())
      throw RuntimeError(strfmt("rerank: sentence %zu has no candidates", i));
    lists[i].source_ids = src_vocab.encode(inputs[i]);
    lists[i].annotated_ids = src_vocab.encode(annotated[i].tokens);
    for (const auto& e : annotated[i].dp_entries) lists[i].marker_positions.push_back(e.position);
  }

  RerankOptions opt;
  opt.lambda = lambda;
  opt.mu = mu;
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < static_cast<int64_t>(lists.size()); ++i)
    rerank(store, mcfg, lists[static_cast<size_t>(i)], opt);

  std::string out_text, nbest_text;
  for (size_t i = 0; i < lists.size(); ++i) {
    std::vector<int> ids = lists[i].candidates.front().tokens;
    ids.pop_back();
    out_text += join_tokens(tgt_vocab.decode(ids));
    out_text += '\n';
    if (!nbest_out.empty()) nbest_text += nbest_to_lines(static_cast<int>(i), lists[i], tgt_vocab);
  }
  write_file_atomic(out, out_text);
  if (!nbest_out.empty()) write_file_atomic(nbest_out, nbest_text);
  std::printf("reranked %zu sentences (lambda %.3g)\n", lists.size(), lambda);
  return 0;
}

std::set<DpItem> dp_items_from_annotated(const std::vector<AnnotatedSentence>& sentences, bool with_words) {
  std::set<DpItem> items;
  for (size_t s = 0; s < sentences.size(); ++s) {
    const auto slots = sentences[s].plain_slots();
    for (size_t d = 0; d < sentences[s].dp_entries.size(); ++d)
      items.emplace(static_cast<int>(s), slots[d],
                    with_words ? sentences[s].dp_entries[d].word : std::string());
  }
  return items;
}

int cmd_evaluate(const std::string& hyp, const std::string& hyp2, const std::string& ref,
                 const std::string& pred_annotated, const std::string& pred_sidecar,
                 const std::string& gold_annotated, const std::string& gold_sidecar,
                 const std::string& out_tsv) {
  std::string tsv, summary;
  if (!hyp.empty()) {
    const auto hyps = load_tokens(hyp);
    const auto refs = load_tokens(ref);
    const BleuReport report = bleu(hyps, refs);
    tsv += report.tsv();
    summary += report.summary() + "\n";
    if (!hyp2.empty()) {
      const auto hyps2 = load_tokens(hyp2);
      const BleuReport report2 = bleu(hyps2, refs);
      tsv += report2.tsv();
      summary += report2.summary() + "\n";
      std::vector<double> seg1, seg2;
      for (size_t i = 0; i < refs.size(); ++i) {
        seg1.push_back(sentence_bleu_smoothed(hyps[i], refs[i]));
        seg2.push_back(sentence_bleu_smoothed(hyps2[i], refs[i]));
      }
      // Per-segment metric: sentence BLEU, add-one smoothed on orders 2-4.
      const SignTestResult st = sign_test(seg1, seg2);
      tsv += strfmt("sign_test_p\twins_hyp\twins_hyp2\tties\tall_tied\n%.8g\t%d\t%d\t%d\t%d\n",
                    st.p_value, st.wins_a, st.wins_b, st.ties, st.all_tied ? 1 : 0);
      summary += strfmt("sign test: p = %.6g (%d wins / %d losses / %d ties)%s\n", st.p_value,
                        st.wins_a, st.wins_b, st.ties, st.all_tied ? " [all segments tied]" : "");
    }
  }
  if (!pred_annotated.empty()) {
    const auto pred = load_annotated(pred_annotated, pred_sidecar);
    const auto gold = load_annotated(gold_annotated, gold_sidecar);
    const auto pred_items = dp_items_from_annotated(pred, true);
    const auto gold_items = dp_items_from_annotated(gold, true);
    const F1Report pos = dp_f1(pred_items, gold_items, DpMatchMode::Position);
    const F1Report word = dp_f1(pred_items, gold_items, DpMatchMode::Word);
    tsv += "dp_position\n" + pos.tsv() + "dp_word\n" + word.tsv();
    summary += strfmt("DP position F1 = %.4f, DP word F1 = %.4f\n", pos.f1, word.f1);
  }
  if (!out_tsv.empty()) write_file_atomic(out_tsv, tsv);
  std::fputs(summary.c_str(), stdout);
  return 0;
}

// A small fixed batch over the synthetic grammar, used by grad-check.
std::vector<TrainExample> grad_check_batch(const ModelConfig& mcfg, const PronounVocabulary& pron_vocab,
                                           uint64_t seed, Vocabulary& src_vocab, Vocabulary& tgt_vocab) {
  GeneratorConfig gen;
  gen.train_size = 2;
  gen.dev_size = 0;
  gen.test_size = 0;
  gen.p_drop = 1.0;  // make sure markers appear
  gen.p_pronoun_subject = 1.0;
  const SyntheticCorpus corpus = generate_synthetic_corpus(gen, seed);
  std::vector<std::vector<std::string>> src_sentences, tgt_sentences;
  for (const auto& ex : corpus.train) {
    src_sentences.push_back(ex.gold->tokens_with_words());
    tgt_sentences.push_back(ex.target);
  }
  src_vocab = Vocabulary::build(src_sentences);
  tgt_vocab = Vocabulary::build(tgt_sentences);
  std::vector<TrainExample> batch;
  for (const auto& ex : corpus.train) {
    TrainExample t;
    const auto& gold = *ex.gold;
    if (mcfg.mode == ReconstructorMode::Separate) {
      t.enc_ids = src_vocab.encode(gold.tokens_with_words());
    } else {
      t.enc_ids = src_vocab.encode(gold.tokens);
    }
    t.tgt_ids = tgt_vocab.encode(ex.target);
    t.tgt_ids.push_back(Vocabulary::kEos);
    if (mcfg.mode != ReconstructorMode::None) {
      t.rec_ids = t.enc_ids;
      if (mcfg.joint_prediction) {
        for (const auto& e : gold.dp_entries) {
          t.marker_positions.push_back(e.position);
          t.gold_dp_ids.push_back(pron_vocab.id(e.word));
        }
      }
    }
    batch.push_back(std::move(t));
  }
  return batch;
}

ModelConfig grad_check_config(const std::string& variant) {
  ModelConfig mcfg;
  mcfg.embed_size = 6;
  mcfg.hidden_size = 7;
  if (variant == "baseline") {
    mcfg.mode = ReconstructorMode::None;
  } else if (variant == "separate") {
    mcfg.mode = ReconstructorMode::Separate;
  } else if (variant == "independent") {
    mcfg.mode = ReconstructorMode::Shared;
  } else if (variant == "enc_to_dec" || variant == "dec_to_enc") {
    mcfg.mode = ReconstructorMode::Shared;
    mcfg.variant = attention_variant_from_string(variant);
  } else if (variant == "joint") {
    mcfg.mode = ReconstructorMode::Shared;
    mcfg.variant = AttentionVariant::EncToDec;
    mcfg.joint_prediction = true;
  } else {
    throw ConfigError("grad-check: unknown variant '" + variant +
                      "' (expected baseline|separate|independent|enc_to_dec|dec_to_enc|joint)");
  }
  return mcfg;
}

double run_grad_check(const std::string& variant, uint64_t seed) {
  ModelConfig mcfg = grad_check_config(variant);
  PronounVocabulary pron_vocab(std::vector<std::string>{"wo", "ni", "ta", "taa", "tan", "women", "tamen"});
  Vocabulary src_vocab, tgt_vocab;
  const auto batch = grad_check_batch(mcfg, pron_vocab, seed, src_vocab, tgt_vocab);
  mcfg.src_vocab_size = src_vocab.size();
  mcfg.tgt_vocab_size = tgt_vocab.size();
  if (mcfg.joint_prediction) mcfg.pronoun_vocab_size = pron_vocab.size();

  ParameterStore store;
  init_parameters(store, mcfg, seed);
  GradCheckOptions opt;
  opt.seed = seed;
  opt.samples_per_param = 2;
  const GradCheckResult result = grad_check(
      [&](Graph& g) { return joint_loss(g, store, mcfg, batch).total; }, store, opt);
  if (!result.ok) throw RuntimeError("grad-check failed: " + result.error);
  std::printf("%s: max relative error %.3g (worst %s[%d])\n", variant.c_str(), result.max_rel_error,
              result.worst_param.c_str(), result.worst_index);
  return result.max_rel_error;
}

int cmd_grad_check(const CommonFlags& common, const std::string& variant, bool all) {
  const uint64_t seed = require_seed(common);
  const std::vector<std::string> variants =
      all ? std::vector<std::string>{"baseline", "separate", "independent", "enc_to_dec", "dec_to_enc",
                                     "joint"}
          : std::vector<std::string>{variant};
  double worst = 0.0;
  for (const auto& v : variants) worst = std::max(worst, run_grad_check(v, seed));
  if (worst >= 1e-4) {
    std::fprintf(stderr, "grad-check: max relative error %.3g exceeds 1e-4\n", worst);
    return 2;
  }
  return 0;
}

int cmd_experiment(const CommonFlags& common, ConfigMap& cfg, const std::string& out_dir,
                   const std::string& seeds_arg, int beam, double lambda, bool verbose) {
  (void)common;
  ExperimentConfig ecfg;
  ecfg.gen = generator_from_config(cfg);
  ecfg.trainer = training_from_config(cfg);
  ecfg.trainer.seed_set = true;
  ecfg.embed_size = cfg.get_int("model.embed_size", ecfg.embed_size);
  ecfg.hidden_size = cfg.get_int("model.hidden_size", ecfg.hidden_size);
  cfg.reject_unknown();
  ecfg.beam = beam;
  ecfg.rerank_lambda = lambda;
  ecfg.out_dir = out_dir;
  ecfg.verbose = verbose;
  if (!seeds_arg.empty()) {
    ecfg.seeds.clear();
    size_t pos = 0;
    while (pos < seeds_arg.size()) {
      size_t comma = seeds_arg.find(',', pos);
      if (comma == std::string::npos) comma = seeds_arg.size();
      ecfg.seeds.push_back(std::stoull(seeds_arg.substr(pos, comma - pos)));
      pos = comma + 1;
    }
  }
  const ExperimentResult result = run_experiment(ecfg);
  std::fputs(result.tsv().c_str(), stdout);
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"pro-drop translation toolkit"};
  app.require_subcommand(1);

  CommonFlags common;

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate the synthetic pro-drop corpus");
  std::string gen_out = "data";
  add_common(gen, common);
  gen->add_option("--out", gen_out, "output directory");

  // annotate
  auto* ann = app.add_subcommand("annotate", "mark dropped pronouns using word alignments");
  std::string ann_src, ann_tgt, ann_align, ann_lex, ann_out_tokens, ann_out_sidecar;
  add_common(ann, common);
  ann->add_option("--src", ann_src)->required();
  ann->add_option("--tgt", ann_tgt)->required();
  ann->add_option("--align", ann_align)->required();
  ann->add_option("--lexicon", ann_lex)->required();
  ann->add_option("--out-tokens", ann_out_tokens)->required();
  ann->add_option("--out-sidecar", ann_out_sidecar)->required();

  // tag
  auto* tag_cmd = app.add_subcommand("tag", "train and/or apply the marker position tagger");
  std::string tag_train_tokens, tag_train_sidecar, tag_model_in, tag_model_out, tag_vocab, tag_input,
      tag_out_tokens, tag_out_sidecar;
  int tag_epochs = 0;
  add_common(tag_cmd, common);
  tag_cmd->add_option("--train-annotated", tag_train_tokens);
  tag_cmd->add_option("--train-sidecar", tag_train_sidecar);
  tag_cmd->add_option("--model", tag_model_in, "load a trained tagger");
  tag_cmd->add_option("--save-model", tag_model_out);
  tag_cmd->add_option("--vocab", tag_vocab)->required();
  tag_cmd->add_option("--input", tag_input, "plain source sentences to tag");
  tag_cmd->add_option("--out-tokens", tag_out_tokens);
  tag_cmd->add_option("--out-sidecar", tag_out_sidecar);
  tag_cmd->add_option("--epochs", tag_epochs);

  // train
  auto* tr = app.add_subcommand("train", "train a translation model");
  std::string tr_src, tr_tgt, tr_annot, tr_sidecar, tr_dev_src, tr_dev_tgt, tr_src_vocab, tr_tgt_vocab,
      tr_pron_vocab, tr_out = "run";
  add_common(tr, common);
  tr->add_option("--train-src", tr_src);
  tr->add_option("--train-tgt", tr_tgt)->required();
  tr->add_option("--train-annotated", tr_annot);
  tr->add_option("--train-sidecar", tr_sidecar);
  tr->add_option("--dev-src", tr_dev_src);
  tr->add_option("--dev-tgt", tr_dev_tgt);
  tr->add_option("--src-vocab", tr_src_vocab)->required();
  tr->add_option("--tgt-vocab", tr_tgt_vocab)->required();
  tr->add_option("--pronoun-vocab", tr_pron_vocab);
  tr->add_option("--out-dir", tr_out);

  // translate
  auto* ts = app.add_subcommand("translate", "beam-search translation");
  std::string ts_input, ts_ckpt, ts_src_vocab, ts_tgt_vocab, ts_out, ts_nbest;
  int ts_beam = 10, ts_max_len = kMaxSentenceLen + 2;
  bool ts_greedy = false;
  add_common(ts, common);
  ts->add_option("--input", ts_input)->required();
  ts->add_option("--checkpoint", ts_ckpt)->required();
  ts->add_option("--src-vocab", ts_src_vocab)->required();
  ts->add_option("--tgt-vocab", ts_tgt_vocab)->required();
  ts->add_option("--out", ts_out)->required();
  ts->add_option("--nbest", ts_nbest);
  ts->add_option("--beam", ts_beam);
  ts->add_option("--max-len", ts_max_len);
  ts->add_flag("--greedy", ts_greedy, "equivalent to --beam 1");

  // rerank
  auto* rr = app.add_subcommand("rerank", "rescore an n-best list with the reconstructor");
  std::string rr_input, rr_annot, rr_sidecar, rr_nbest_in, rr_ckpt, rr_src_vocab, rr_tgt_vocab,
      rr_pron_vocab, rr_out, rr_nbest_out;
  double rr_lambda = 1.0, rr_mu = 0.0;
  add_common(rr, common);
  rr->add_option("--input", rr_input)->required();
  rr->add_option("--annotated", rr_annot)->required();
  rr->add_option("--sidecar", rr_sidecar)->required();
  rr->add_option("--nbest", rr_nbest_in)->required();
  rr->add_option("--checkpoint", rr_ckpt)->required();
  rr->add_option("--src-vocab", rr_src_vocab)->required();
  rr->add_option("--tgt-vocab", rr_tgt_vocab)->required();
  rr->add_option("--pronoun-vocab", rr_pron_vocab);
  rr->add_option("--out", rr_out)->required();
  rr->add_option("--out-nbest", rr_nbest_out);
  rr->add_option("--lambda", rr_lambda, "reconstruction weight");
  rr->add_option("--mu", rr_mu, "pronoun confidence weight");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "BLEU, sign test, and pronoun F1");
  std::string ev_hyp, ev_hyp2, ev_ref, ev_pred, ev_pred_sidecar, ev_gold, ev_gold_sidecar, ev_out;
  add_common(ev, common);
  ev->add_option("--hyp", ev_hyp);
  ev->add_option("--hyp2", ev_hyp2);
  ev->add_option("--ref", ev_ref);
  ev->add_option("--pred-annotated", ev_pred);
  ev->add_option("--pred-sidecar", ev_pred_sidecar);
  ev->add_option("--gold-annotated", ev_gold);
  ev->add_option("--gold-sidecar", ev_gold_sidecar);
  ev->add_option("--out", ev_out, "report TSV path");

  // grad-check
  auto* gc = app.add_subcommand("grad-check", "finite-difference gradient verification");
  std::string gc_variant = "joint";
  bool gc_all = false;
  add_common(gc, common);
  gc->add_option("--variant", gc_variant, "baseline|separate|independent|enc_to_dec|dec_to_enc|joint");
  gc->add_flag("--all", gc_all, "check all six configurations");

  // experiment
  auto* ex = app.add_subcommand("experiment", "synthetic trend experiment across seeds");
  std::string ex_out = "experiment", ex_seeds;
  int ex_beam = 10;
  double ex_lambda = 1.0;
  bool ex_verbose = false;
  add_common(ex, common);
  ex->add_option("--out", ex_out);
  ex->add_option("--seeds", ex_seeds, "comma-separated seed list");
  ex->add_option("--beam", ex_beam);
  ex->add_option("--lambda", ex_lambda);
  ex->add_flag("--verbose", ex_verbose);

  app.parse(argc, argv);
  apply_backend(common);
  ConfigMap cfg = load_config(common);

  if (gen->parsed()) return cmd_gen_data(common, cfg, gen_out);
  if (ann->parsed()) return cmd_annotate(ann_src, ann_tgt, ann_align, ann_lex, ann_out_tokens, ann_out_sidecar);
  if (tag_cmd->parsed())
    return cmd_tag(common, tag_train_tokens, tag_train_sidecar, tag_model_in, tag_model_out, tag_vocab,
                   tag_input, tag_out_tokens, tag_out_sidecar, tag_epochs);
  if (tr->parsed())
    return cmd_train(common, cfg, tr_src, tr_tgt, tr_annot, tr_sidecar, tr_dev_src, tr_dev_tgt,
                     tr_src_vocab, tr_tgt_vocab, tr_pron_vocab, tr_out);
  if (ts->parsed())
    return cmd_translate(common, cfg, ts_input, ts_ckpt, ts_src_vocab, ts_tgt_vocab, ts_out, ts_nbest,
                         ts_beam, ts_max_len, ts_greedy);
  if (rr->parsed())
    return cmd_rerank(common, cfg, rr_input, rr_annot, rr_sidecar, rr_nbest_in, rr_ckpt, rr_src_vocab,
                      rr_tgt_vocab, rr_pron_vocab, rr_out, rr_nbest_out, rr_lambda, rr_mu);
  if (ev->parsed())
    return cmd_evaluate(ev_hyp, ev_hyp2, ev_ref, ev_pred, ev_pred_sidecar, ev_gold, ev_gold_sidecar, ev_out);
  if (gc->parsed()) return cmd_grad_check(common, gc_variant, gc_all);
  if (ex->parsed()) return cmd_experiment(common, cfg, ex_out, ex_seeds, ex_beam, ex_lambda, ex_verbose);
  return 1;
}

}  // namespace
}  // namespace pdnmt

int main(int argc, char** argv) {
  try {
    return pdnmt::dispatch(argc, argv);
  } catch (const CLI::ParseError& e) {
    CLI::App app;
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const pdnmt::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
