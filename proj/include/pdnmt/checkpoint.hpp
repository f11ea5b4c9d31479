// Binary checkpoint: "PDNMT1" magic, format version, model-config digest,
// then named parameter arrays stored as 32-bit little-endian floats.
// Loading promotes back to 64-bit.
#pragma once

#include <cstdint>
#include <string>

#include "pdnmt/param_store.hpp"

namespace pdnmt {

inline constexpr char kCheckpointMagic[6] = {'P', 'D', 'N', 'M', 'T', '1'};
inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const ParameterStore& store, uint64_t config_digest);

// Rejects a digest mismatch unless expected_digest is 0.
ParameterStore load_checkpoint(const std::string& path, uint64_t expected_digest);

uint64_t checkpoint_digest(const std::string& path);

}  // namespace pdnmt
