#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "irr/models/model.hpp"

namespace irr::models {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Checkpoint layout (all integers little-endian):
//   8 bytes  magic "IRRCKPT1"
//   u64      length of the ModelConfig JSON, then the JSON bytes
//   u32      block count, then per block:
//              u32 name length, name bytes, u32 tensor count, then per tensor:
//              u32 key length, key bytes, u32 rank, i32 dims[rank], f64 values
// A pretty-printed copy of the config is written next to it as "<path>.json".

void save_checkpoint(const Model& model, const std::filesystem::path& path);
/// Rebuilds the model from the embedded config and overwrites every tensor.
Model load_checkpoint(const std::filesystem::path& path);
/// Copies all parameter values from `src` into `dst`; registries must match.
void copy_parameters(const Model& src, Model& dst);

}  // namespace irr::models
