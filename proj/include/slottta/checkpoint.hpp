#pragma once

#include <string>

#include "slottta/model.hpp"
#include "slottta/registry.hpp"

namespace slottta {

// Single-file checkpoint: u32 header length, JSON header (format version,
// parameter names/tags/offsets, model config, an arbitrary snapshot object),
// then one SLT1 record per tensor at the recorded offsets.
struct Checkpoint {
  ParamRegistry<float> params;
  ModelConfig config;
  std::string snapshot_json;  // run configuration at save time ("{}" when none)
};

void save_checkpoint(const std::string& path, const ParamRegistry<float>& params, const ModelConfig& config,
                     const std::string& snapshot_json = "{}");
Checkpoint load_checkpoint(const std::string& path);

// Verifies that a loaded registry matches the architecture the config
// implies; throws FormatError listing missing/unexpected names.
void check_architecture(const ParamRegistry<float>& loaded, const ModelConfig& config);

std::string model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const std::string& text);

}  // namespace slottta
