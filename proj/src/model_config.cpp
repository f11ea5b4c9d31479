#include "pdnmt/model_config.hpp"

#include "pdnmt/error.hpp"
#include "pdnmt/rng.hpp"

namespace pdnmt {

const char* to_string(ReconstructorMode m) {
  switch (m) {
    case ReconstructorMode::None: return "none";
    case ReconstructorMode::Separate: return "separate";
    case ReconstructorMode::Shared: return "shared";
  }
  return "?";
}

const char* to_string(AttentionVariant v) {
  switch (v) {
    case AttentionVariant::Independent: return "independent";
    case AttentionVariant::EncToDec: return "enc_to_dec";
    case AttentionVariant::DecToEnc: return "dec_to_enc";
  }
  return "?";
}

ReconstructorMode reconstructor_mode_from_string(const std::string& s) {
  if (s == "none") return ReconstructorMode::None;
  if (s == "separate") return ReconstructorMode::Separate;
  if (s == "shared") return ReconstructorMode::Shared;
  throw ConfigError("unknown reconstructor mode: " + s);
}

AttentionVariant attention_variant_from_string(const std::string& s) {
  if (s == "independent") return AttentionVariant::Independent;
  if (s == "enc_to_dec") return AttentionVariant::EncToDec;
  if (s == "dec_to_enc") return AttentionVariant::DecToEnc;
  throw ConfigError("unknown attention variant: " + s);
}

void ModelConfig::validate() const {
  if (src_vocab_size < 6 || tgt_vocab_size < 6)
    throw ConfigError("model: vocabulary sizes must cover the reserved tokens");
  if (embed_size < 1 || hidden_size < 1) throw ConfigError("model: embedding and hidden sizes must be positive");
  if (joint_prediction && mode != ReconstructorMode::Shared)
    throw ConfigError("model: joint_prediction requires the shared reconstructor");
  if (joint_prediction && pronoun_vocab_size < 2)
    throw ConfigError("model: joint_prediction needs a pronoun vocabulary");
  if (variant != AttentionVariant::Independent && mode != ReconstructorMode::Shared)
    throw ConfigError("model: interactive attention requires the shared reconstructor");
}

std::string ModelConfig::canonical() const {
  return strfmt("src=%d|tgt=%d|embed=%d|hidden=%d|mode=%s|variant=%s|joint=%d|pron=%d",
                src_vocab_size, tgt_vocab_size, embed_size, hidden_size, to_string(mode),
                to_string(variant), joint_prediction ? 1 : 0, pronoun_vocab_size);
}

uint64_t ModelConfig::digest() const { return fnv1a(canonical()); }

}  // namespace pdnmt
