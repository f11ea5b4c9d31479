#include "pdnmt/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <set>

#include "pdnmt/corpus.hpp"
#include "pdnmt/decoding.hpp"
#include "pdnmt/dp.hpp"
#include "pdnmt/error.hpp"
#include "pdnmt/eval.hpp"
#include "pdnmt/reconstructor.hpp"
#include "pdnmt/vocab.hpp"

namespace pdnmt {

namespace {

struct SeedData {
  SyntheticCorpus corpus;
  Vocabulary src_vocab;
  Vocabulary tgt_vocab;
  PronounVocabulary pron_vocab;
  std::vector<TrainExample> train_baseline;
  std::vector<TrainExample> train_shared;
  std::vector<TrainExample> dev_examples;  // annotated input + reference
  std::vector<AnnotatedSentence> test_tagged;
  std::vector<std::vector<std::string>> test_refs;
};

TrainExample render_example(const ParallelExample& ex, const Vocabulary& src_vocab,
                            const Vocabulary& tgt_vocab, const PronounVocabulary& pron_vocab,
                            bool with_reconstruction) {
  if (!ex.gold.has_value()) throw RuntimeError("experiment: example lacks gold annotation");
  TrainExample out;
  out.enc_ids = src_vocab.encode(ex.gold->tokens);
  out.tgt_ids = tgt_vocab.encode(ex.target);
  out.tgt_ids.push_back(Vocabulary::kEos);
  if (with_reconstruction) {
    out.rec_ids = out.enc_ids;
    for (const auto& e : ex.gold->dp_entries) {
      out.marker_positions.push_back(e.position);
      out.gold_dp_ids.push_back(pron_vocab.id(e.word));
    }
  }
  return out;
}

SeedData prepare_seed(const ExperimentConfig& cfg, uint64_t seed) {
  SeedData d;
  d.corpus = generate_synthetic_corpus(cfg.gen, seed);

  std::vector<std::vector<std::string>> src_sentences, tgt_sentences;
  for (const auto& ex : d.corpus.train) {
    src_sentences.push_back(ex.gold->tokens_with_words());
    tgt_sentences.push_back(ex.target);
  }
  d.src_vocab = Vocabulary::build(src_sentences);
  d.tgt_vocab = Vocabulary::build(tgt_sentences);
  d.pron_vocab = PronounVocabulary(d.corpus.source_pronouns);

  for (const auto& ex : d.corpus.train) {
    d.train_baseline.push_back(render_example(ex, d.src_vocab, d.tgt_vocab, d.pron_vocab, false));
    d.train_shared.push_back(render_example(ex, d.src_vocab, d.tgt_vocab, d.pron_vocab, true));
  }
  for (const auto& ex : d.corpus.dev)
    d.dev_examples.push_back(render_example(ex, d.src_vocab, d.tgt_vocab, d.pron_vocab, false));
  for (const auto& ex : d.corpus.test) d.test_refs.push_back(ex.target);
  return d;
}

// Greedy dev BLEU used for model selection during training.
double dev_bleu(const ParameterStore& store, const ModelConfig& mcfg, const SeedData& d, int max_len) {
  std::vector<std::vector<std::string>> hyps(d.dev_examples.size());
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < static_cast<int64_t>(d.dev_examples.size()); ++i) {
    const auto tokens = greedy_translate(store, mcfg, d.dev_examples[static_cast<size_t>(i)].enc_ids, max_len);
    hyps[static_cast<size_t>(i)] = d.tgt_vocab.decode(tokens);
  }
  std::vector<std::vector<std::string>> refs;
  for (const auto& ex : d.corpus.dev) refs.push_back(ex.target);
  return bleu(hyps, refs).bleu;
}

std::vector<NBestList> decode_test(const ParameterStore& store, const ModelConfig& mcfg,
                                   const SeedData& d, int beam, int max_len) {
  std::vector<NBestList> out(d.test_tagged.size());
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < static_cast<int64_t>(d.test_tagged.size()); ++i) {
    const auto& tagged = d.test_tagged[static_cast<size_t>(i)];
    NBestList nbest = beam_search(store, mcfg, d.src_vocab.encode(tagged.tokens), beam, max_len);
    nbest.annotated_ids = nbest.source_ids;
    for (const auto& e : tagged.dp_entries) nbest.marker_positions.push_back(e.position);
    out[static_cast<size_t>(i)] = std::move(nbest);
  }
  return out;
}

std::vector<std::vector<std::string>> top_tokens(const std::vector<NBestList>& lists,
                                                 const Vocabulary& tgt_vocab) {
  std::vector<std::vector<std::string>> out;
  out.reserve(lists.size());
  for (const auto& nbest : lists) {
    std::vector<int> ids = nbest.candidates.front().tokens;
    ids.pop_back();  // EOS
    out.push_back(tgt_vocab.decode(ids));
  }
  return out;
}

std::set<DpItem> gold_dp_items(const Corpus& test) {
  std::set<DpItem> items;
  for (size_t s = 0; s < test.size(); ++s) {
    const auto& gold = *test[s].gold;
    const auto slots = gold.plain_slots();
    for (size_t d = 0; d < gold.dp_entries.size(); ++d)
      items.emplace(static_cast<int>(s), slots[d], gold.dp_entries[d].word);
  }
  return items;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result;
  const bool write_files = !cfg.out_dir.empty();
  if (write_files) std::filesystem::create_directories(cfg.out_dir);

  for (const uint64_t seed : cfg.seeds) {
    if (cfg.verbose) std::fprintf(stderr, "[experiment] seed %llu: generating data\n",
                                  static_cast<unsigned long long>(seed));
    SeedData d = prepare_seed(cfg, seed);

    ModelConfig base_cfg;
    base_cfg.src_vocab_size = d.src_vocab.size();
    base_cfg.tgt_vocab_size = d.tgt_vocab.size();
    base_cfg.embed_size = cfg.embed_size;
    base_cfg.hidden_size = cfg.hidden_size;
    base_cfg.mode = ReconstructorMode::None;

    ModelConfig shared_cfg = base_cfg;
    shared_cfg.mode = ReconstructorMode::Shared;
    shared_cfg.variant = AttentionVariant::EncToDec;
    shared_cfg.joint_prediction = true;
    shared_cfg.pronoun_vocab_size = d.pron_vocab.size();

    TrainingConfig tcfg = cfg.trainer;
    tcfg.seed = seed;
    tcfg.seed_set = true;

    // Position tagger and the context-free word baseline, both trained on
    // the training annotations.
    std::vector<AnnotatedSentence> train_annotations;
    for (const auto& ex : d.corpus.train) train_annotations.push_back(*ex.gold);
    std::vector<TaggerExample> tagger_data;
    for (const auto& s : train_annotations)
      tagger_data.push_back(tagger_example_from_annotation(s, d.src_vocab));
    TaggerConfig tag_cfg;
    tag_cfg.vocab_size = d.src_vocab.size();
    tag_cfg.seed = seed;
    if (cfg.verbose) std::fprintf(stderr, "[experiment] seed %llu: training tagger\n",
                                  static_cast<unsigned long long>(seed));
    const TaggerModel tagger = train_dpp_tagger(tagger_data, tag_cfg);
    ExternalWordClassifier external;
    external.train(train_annotations);

    d.test_tagged.reserve(d.corpus.test.size());
    for (const auto& ex : d.corpus.test) d.test_tagged.push_back(tag(ex.source, tagger, d.src_vocab));

    auto dev_score = [&](const ModelConfig& mcfg) {
      return std::function<double(const ParameterStore&)>(
          [&, mcfg](const ParameterStore& store) { return dev_bleu(store, mcfg, d, cfg.max_len); });
    };

    if (cfg.verbose) std::fprintf(stderr, "[experiment] seed %llu: training baseline (+DPPs)\n",
                                  static_cast<unsigned long long>(seed));
    ParameterStore base_store;
    init_parameters(base_store, base_cfg, seed);
    train(base_store, base_cfg, tcfg, d.train_baseline, dev_score(base_cfg));

    if (cfg.verbose) std::fprintf(stderr, "[experiment] seed %llu: training shared reconstructor\n",
                                  static_cast<unsigned long long>(seed));
    ParameterStore shared_store;
    init_parameters(shared_store, shared_cfg, seed);
    train(shared_store, shared_cfg, tcfg, d.train_shared, dev_score(shared_cfg));

    if (cfg.verbose) std::fprintf(stderr, "[experiment] seed %llu: decoding test\n",
                                  static_cast<unsigned long long>(seed));
    const std::vector<NBestList> base_nbest = decode_test(base_store, base_cfg, d, cfg.beam, cfg.max_len);
    std::vector<NBestList> shared_nbest = decode_test(shared_store, shared_cfg, d, cfg.beam, cfg.max_len);

    const auto base_top = top_tokens(base_nbest, d.tgt_vocab);
    const auto shared_top = top_tokens(shared_nbest, d.tgt_vocab);

    RerankOptions ropt;
    ropt.lambda = cfg.rerank_lambda;
#pragma omp parallel for schedule(dynamic)
    for (int64_t i = 0; i < static_cast<int64_t>(shared_nbest.size()); ++i)
      rerank(shared_store, shared_cfg, shared_nbest[static_cast<size_t>(i)], ropt);
    const auto reranked_top = top_tokens(shared_nbest, d.tgt_vocab);

    SeedOutcome outcome;
    outcome.seed = seed;
    outcome.bleu_baseline = bleu(base_top, d.test_refs).bleu;
    outcome.bleu_shared = bleu(shared_top, d.test_refs).bleu;
    outcome.bleu_shared_reranked = bleu(reranked_top, d.test_refs).bleu;

    std::vector<double> base_seg, reranked_seg;
    for (size_t i = 0; i < d.test_refs.size(); ++i) {
      base_seg.push_back(sentence_bleu_smoothed(base_top[i], d.test_refs[i]));
      reranked_seg.push_back(sentence_bleu_smoothed(reranked_top[i], d.test_refs[i]));
    }
    outcome.sign_test_p = sign_test(reranked_seg, base_seg).p_value;

    // Pronoun prediction: every system shares the tagger's positions.
    const std::set<DpItem> gold_items = gold_dp_items(d.corpus.test);
    std::set<DpItem> tagger_items, external_items, joint_items;
    for (size_t s = 0; s < d.test_tagged.size(); ++s) {
      const auto slots = d.test_tagged[s].plain_slots();
      for (int slot : slots) {
        tagger_items.emplace(static_cast<int>(s), slot, std::string());
        external_items.emplace(static_cast<int>(s), slot, external.predict());
      }
      if (d.test_tagged[s].dp_entries.empty()) continue;
      // Joint prediction over the reconstructor states of the final output.
      Graph g;
      const StateSequence enc = encode(g, shared_store, shared_cfg, shared_nbest[s].source_ids);
      const TeacherForcedResult tf = decode_teacher_forced(g, shared_store, shared_cfg, enc,
                                                           shared_nbest[s].candidates.front().tokens);
      const ReconstructionOutput rec = reconstruct_shared(g, shared_store, shared_cfg,
                                                          shared_nbest[s].annotated_ids, enc, tf.states,
                                                          shared_cfg.variant);
      std::vector<std::vector<double>> states;
      for (const Tensor& st : rec.states.steps) states.push_back(st.values);
      const auto preds = predict_dp_words(states, shared_nbest[s].marker_positions, shared_store);
      for (size_t k = 0; k < preds.size(); ++k)
        joint_items.emplace(static_cast<int>(s), slots[k], d.pron_vocab.token(preds[k].word_id));
    }
    outcome.tagger_position_f1 = dp_f1(tagger_items, gold_items, DpMatchMode::Position).f1;
    outcome.external_word_f1 = dp_f1(external_items, gold_items, DpMatchMode::Word).f1;
    outcome.joint_word_f1 = dp_f1(joint_items, gold_items, DpMatchMode::Word).f1;
    result.seeds.push_back(outcome);

    if (write_files) {
      const std::string prefix = cfg.out_dir + "/seed" + std::to_string(seed);
      save_corpus(d.corpus.test, prefix + ".test.src", prefix + ".test.tgt", prefix + ".test.align");
      save_annotated(d.test_tagged, prefix + ".test.tagged", prefix + ".test.tagged.tsv");
      std::string base_out, shared_out, reranked_out;
      for (size_t i = 0; i < d.test_refs.size(); ++i) {
        base_out += join_tokens(base_top[i]) + "\n";
        shared_out += join_tokens(shared_top[i]) + "\n";
        reranked_out += join_tokens(reranked_top[i]) + "\n";
      }
      write_file_atomic(prefix + ".baseline.out", base_out);
      write_file_atomic(prefix + ".shared.out", shared_out);
      write_file_atomic(prefix + ".reranked.out", reranked_out);
    }
    if (cfg.verbose)
      std::fprintf(stderr,
                   "[experiment] seed %llu: baseline %.2f, shared %.2f, reranked %.2f, p %.4g, "
                   "joint F1 %.3f, external F1 %.3f, tagger F1 %.3f\n",
                   static_cast<unsigned long long>(seed), outcome.bleu_baseline, outcome.bleu_shared,
                   outcome.bleu_shared_reranked, outcome.sign_test_p, outcome.joint_word_f1,
                   outcome.external_word_f1, outcome.tagger_position_f1);
  }

  if (write_files) write_file_atomic(cfg.out_dir + "/experiment.tsv", result.tsv());
  return result;
}

namespace {
double mean_of(const std::vector<SeedOutcome>& seeds, double SeedOutcome::* field) {
  double sum = 0.0;
  for (const auto& s : seeds) sum += s.*field;
  return seeds.empty() ? 0.0 : sum / static_cast<double>(seeds.size());
}
}  // namespace

double ExperimentResult::mean_bleu_baseline() const { return mean_of(seeds, &SeedOutcome::bleu_baseline); }
double ExperimentResult::mean_bleu_shared() const { return mean_of(seeds, &SeedOutcome::bleu_shared); }
double ExperimentResult::mean_bleu_shared_reranked() const {
  return mean_of(seeds, &SeedOutcome::bleu_shared_reranked);
}
double ExperimentResult::mean_joint_word_f1() const { return mean_of(seeds, &SeedOutcome::joint_word_f1); }
double ExperimentResult::mean_external_word_f1() const {
  return mean_of(seeds, &SeedOutcome::external_word_f1);
}

std::string ExperimentResult::tsv() const {
  std::string out = "seed\tvariant\tbleu\tdp_word_f1\tdp_position_f1\tp_value\n";
  auto row = [&out](const std::string& seed, const std::string& variant, const std::string& bleu,
                    const std::string& wf1, const std::string& pf1, const std::string& p) {
    out += seed + "\t" + variant + "\t" + bleu + "\t" + wf1 + "\t" + pf1 + "\t" + p + "\n";
  };
  for (const auto& s : seeds) {
    const std::string seed = std::to_string(s.seed);
    row(seed, "baseline_dpp", strfmt("%.4f", s.bleu_baseline), "-", "-", "-");
    row(seed, "shared_enc2dec_joint", strfmt("%.4f", s.bleu_shared), "-", "-", "-");
    row(seed, "shared_enc2dec_joint_rerank", strfmt("%.4f", s.bleu_shared_reranked),
        strfmt("%.4f", s.joint_word_f1), "-", strfmt("%.6g", s.sign_test_p));
    row(seed, "external_tagger_classifier", "-", strfmt("%.4f", s.external_word_f1),
        strfmt("%.4f", s.tagger_position_f1), "-");
  }
  if (!seeds.empty()) {
    row("mean", "baseline_dpp", strfmt("%.4f", mean_bleu_baseline()), "-", "-", "-");
    row("mean", "shared_enc2dec_joint", strfmt("%.4f", mean_bleu_shared()), "-", "-", "-");
    row("mean", "shared_enc2dec_joint_rerank", strfmt("%.4f", mean_bleu_shared_reranked()),
        strfmt("%.4f", mean_joint_word_f1()), "-", "-");
    row("mean", "external_tagger_classifier", "-", strfmt("%.4f", mean_external_word_f1()), "-", "-");
  }
  return out;
}

}  // namespace pdnmt
