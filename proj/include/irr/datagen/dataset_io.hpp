#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "irr/datagen/render.hpp"
#include "irr/datagen/scene.hpp"

namespace irr::datagen {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file contents (bad magic, sizes that disagree with the payload).
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

/// "FLO2", int32 width, int32 height, then row-major interleaved float32 (u, v);
/// little-endian.
void write_flow(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flow(const std::filesystem::path& path);

/// Binary 8-bit PGM (P5): 0 = visible, 255 = occluded.
void write_occlusion(const std::filesystem::path& path, const OcclusionMap& occ);
OcclusionMap read_occlusion(const std::filesystem::path& path);

/// 8-bit RGB PNG; values are clamped to [0, 1] and rounded to 1/255 steps.
void write_png(const std::filesystem::path& path, const Image& image);
Image read_png(const std::filesystem::path& path);
/// Raw 8-bit writer: `channels` is 1 (gray) or 3 (RGB), pixels interleaved.
void write_png_bytes(const std::filesystem::path& path, int width, int height, int channels,
                     const std::vector<std::uint8_t>& pixels);

struct DatasetSpec {
  SceneConfig scene;
  std::uint64_t base_seed = 0;
  std::size_t count = 0;
  double train_fraction = 0.9;
};

void to_json(nlohmann::json& j, const DatasetSpec& d);
void from_json(const nlohmann::json& j, DatasetSpec& d);

struct ManifestRecord {
  std::size_t id = 0;
  std::uint64_t seed = 0;
  std::string split;
  std::map<std::string, std::string> files;
  std::string config_hash;
};

struct Dataset {
  DatasetSpec spec;
  std::vector<ManifestRecord> records;
  std::vector<SceneSample> samples;

  std::vector<const SceneSample*> split(const std::string& name) const;
};

/// Seed of sample `id`.
std::uint64_t sample_seed(std::uint64_t base_seed, std::size_t id);
/// Number of training samples: round(count * train_fraction).
std::size_t train_count(const DatasetSpec& spec);

/// Generates every sample in memory, quantized to storage precision, using up
/// to `threads` workers (output does not depend on the thread count).
Dataset generate_dataset(const DatasetSpec& spec, unsigned threads = 1);

/// Layout: dataset.json, manifest.jsonl and samples/<id>_{img1,img2}.png,
/// _flow_fw.flo2, _flow_bw.flo2, _occ1.pgm, _occ2.pgm (+ _valid.pgm).
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace irr::datagen
