#pragma once

#include <cstdint>
#include <string>

namespace pdnmt {

enum class ReconstructorMode { None, Separate, Shared };
enum class AttentionVariant { Independent, EncToDec, DecToEnc };

const char* to_string(ReconstructorMode m);
const char* to_string(AttentionVariant v);
ReconstructorMode reconstructor_mode_from_string(const std::string& s);
AttentionVariant attention_variant_from_string(const std::string& s);

struct ModelConfig {
  int src_vocab_size = 0;
  int tgt_vocab_size = 0;
  int embed_size = 64;
  int hidden_size = 64;
  ReconstructorMode mode = ReconstructorMode::None;
  AttentionVariant variant = AttentionVariant::Independent;
  bool joint_prediction = false;
  int pronoun_vocab_size = 0;

  void validate() const;
  std::string canonical() const;
  uint64_t digest() const;
};

}  // namespace pdnmt
