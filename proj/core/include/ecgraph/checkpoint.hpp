#pragma once

#include <string>

#include "ecgraph/crtnet.hpp"

namespace ecgraph {

// Model file: "CRTN" magic, format version, the architecture fields, then
// the named parameter tensors with float32 payloads, all little-endian.
// Load re-derives the expected tensor set from the stored config and
// rejects files that do not match it.

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string format_checkpoint(const ModelConfig& cfg, const CrtNetParams& params);

struct LoadedModel {
  ModelConfig config;
  CrtNetParams params;
};

LoadedModel parse_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const ModelConfig& cfg, const CrtNetParams& params);
LoadedModel load_checkpoint(const std::string& path);

} // namespace ecgraph
