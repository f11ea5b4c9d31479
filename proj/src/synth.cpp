#include "pdnmt/synth.hpp"

#include "pdnmt/error.hpp"
#include "pdnmt/rng.hpp"
#include "pdnmt/vocab.hpp"

namespace pdnmt {

namespace {

struct PronounForms {
  const char* source;
  const char* subject;   // target subject form
  const char* object;    // target object form
  char agreement;        // verb suffix class
};

constexpr PronounForms kPronouns[] = {
    {"wo", "i", "me", 'w'},     {"ni", "you", "you", 'n'},   {"ta", "he", "him", 't'},
    {"taa", "she", "her", 't'}, {"tan", "it", "it", 't'},    {"women", "we", "us", 'm'},
    {"tamen", "they", "them", 'p'},
};

constexpr const char* kNounsSrc[] = {"gou",    "mao",    "pingguo", "shu",     "che",     "fangzi",
                                     "laoshi", "haizi",  "yisheng", "pengyou", "mianbao", "hua"};
constexpr const char* kNounsTgt[] = {"dog",     "cat",   "apple",  "book",  "car",   "house",
                                     "teacher", "child", "doctor", "friend", "bread", "flower"};

constexpr const char* kVerbsSrc[] = {"chi", "kan", "mai", "zhao", "xihuan", "na", "songgei", "du"};
constexpr const char* kVerbsTgt[] = {"eat", "see", "buy", "find", "like", "take", "give", "read"};

constexpr const char* kTimeSrc[] = {"jintian", "zuotian", "mingtian", "xianzai"};
constexpr const char* kTimeTgt[] = {"today", "yesterday", "tomorrow", "now"};

constexpr const char* kAdvSrc[] = {"zheli", "nali", "kuaikuai", "manman"};
constexpr const char* kAdvTgt[] = {"here", "there", "quickly", "slowly"};

struct Slot {
  Slot(std::string s, std::string t) : src(std::move(s)), tgt(std::move(t)) {}
  std::string src;
  std::string tgt;
  bool dropped = false;
  std::string dp_word;  // source pronoun when dropped
};

ParallelExample make_example(const GeneratorConfig& cfg, Rng& rng) {
  for (int attempt = 0; attempt < 256; ++attempt) {
    std::vector<Slot> slots;

    if (rng.bernoulli(cfg.p_time)) {
      const uint32_t t = rng.below(4);
      slots.push_back({kTimeSrc[t], kTimeTgt[t]});
    }

    // Subject.
    char agreement = 't';
    const bool subj_pron = rng.bernoulli(cfg.p_pronoun_subject);
    int subj_pron_idx = -1;
    if (subj_pron) {
      subj_pron_idx = static_cast<int>(rng.below(static_cast<uint32_t>(cfg.pronoun_count)));
      const auto& p = kPronouns[subj_pron_idx];
      agreement = p.agreement;
      slots.push_back({p.source, p.subject});
    } else {
      const uint32_t n = rng.below(static_cast<uint32_t>(cfg.noun_count));
      slots.push_back({kNounsSrc[n], kNounsTgt[n]});
    }
    const size_t subj_slot = slots.size() - 1;

    // Verb, conjugated on the source side.
    const uint32_t v = rng.below(static_cast<uint32_t>(cfg.verb_count));
    slots.push_back({std::string(kVerbsSrc[v]) + "_" + agreement, kVerbsTgt[v]});

    // Object.
    const bool obj_pron = rng.bernoulli(cfg.p_pronoun_object);
    int obj_pron_idx = -1;
    if (obj_pron) {
      obj_pron_idx = static_cast<int>(rng.below(static_cast<uint32_t>(cfg.pronoun_count)));
      const auto& p = kPronouns[obj_pron_idx];
      slots.push_back({p.source, p.object});
    } else {
      const uint32_t n = rng.below(static_cast<uint32_t>(cfg.noun_count));
      slots.push_back({kNounsSrc[n], kNounsTgt[n]});
    }
    const size_t obj_slot = slots.size() - 1;

    if (rng.bernoulli(cfg.p_adverb)) {
      const uint32_t a = rng.below(4);
      slots.push_back({kAdvSrc[a], kAdvTgt[a]});
    }

    if (static_cast<int>(slots.size()) < cfg.min_len || static_cast<int>(slots.size()) > cfg.max_len)
      continue;

    // Pro-drop.
    if (subj_pron && rng.bernoulli(cfg.p_drop)) {
      slots[subj_slot].dropped = true;
      slots[subj_slot].dp_word = kPronouns[subj_pron_idx].source;
    }
    if (obj_pron && rng.bernoulli(cfg.p_drop)) {
      slots[obj_slot].dropped = true;
      slots[obj_slot].dp_word = kPronouns[obj_pron_idx].source;
    }

    ParallelExample ex;
    AnnotatedSentence gold;
    std::vector<std::pair<int, int>> align;
    for (size_t k = 0; k < slots.size(); ++k) {
      ex.target.push_back(slots[k].tgt);
      if (slots[k].dropped) {
        gold.dp_entries.push_back({static_cast<int>(k), slots[k].dp_word});
        gold.tokens.push_back(Vocabulary::dp_marker_token());
      } else {
        align.emplace_back(static_cast<int>(ex.source.size()), static_cast<int>(k));
        ex.source.push_back(slots[k].src);
        gold.tokens.push_back(slots[k].src);
      }
    }
    ex.alignment = std::move(align);
    ex.gold = std::move(gold);
    return ex;
  }
  throw RuntimeError("synthetic generator: could not satisfy the length range");
}

Corpus make_split(const GeneratorConfig& cfg, uint64_t seed, uint64_t split, int count) {
  Corpus out;
  out.reserve(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) {
    Rng rng(seed, (split << 40) + static_cast<uint64_t>(k));
    out.push_back(make_example(cfg, rng));
  }
  return out;
}

}  // namespace

void GeneratorConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(strfmt("generator: %s must be in [0, 1], got %g", name, p));
  };
  prob(p_drop, "p_drop");
  prob(p_pronoun_subject, "p_pronoun_subject");
  prob(p_pronoun_object, "p_pronoun_object");
  prob(p_time, "p_time");
  prob(p_adverb, "p_adverb");
  if (train_size < 0 || dev_size < 0 || test_size < 0)
    throw ConfigError("generator: corpus sizes must be non-negative");
  if (pronoun_count < 1 || pronoun_count > 7)
    throw ConfigError(strfmt("generator: pronoun_count must be in [1, 7], got %d", pronoun_count));
  if (noun_count < 1 || noun_count > 12)
    throw ConfigError(strfmt("generator: noun_count must be in [1, 12], got %d", noun_count));
  if (verb_count < 1 || verb_count > 8)
    throw ConfigError(strfmt("generator: verb_count must be in [1, 8], got %d", verb_count));
  if (min_len < 3 || max_len > 8 || min_len > max_len)
    throw ConfigError(strfmt("generator: length range [%d, %d] must lie inside [3, 8]", min_len, max_len));
}

SyntheticCorpus generate_synthetic_corpus(const GeneratorConfig& cfg, uint64_t seed) {
  cfg.validate();
  SyntheticCorpus out;
  out.train = make_split(cfg, seed, 0, cfg.train_size);
  out.dev = make_split(cfg, seed, 1, cfg.dev_size);
  out.test = make_split(cfg, seed, 2, cfg.test_size);
  for (int p = 0; p < cfg.pronoun_count; ++p) {
    out.source_pronouns.push_back(kPronouns[p].source);
    out.lexicon.map.emplace(kPronouns[p].subject, kPronouns[p].source);
    out.lexicon.map.emplace(kPronouns[p].object, kPronouns[p].source);
  }
  return out;
}

}  // namespace pdnmt
