#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noksha/model/pix2pix.hpp"
#include "noksha/nn/adam.hpp"
#include "noksha/train/config.hpp"

namespace noksha::train {

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class DType : std::uint8_t { kFloat32 = 0, kBytes = 1 };

/// One named record of the container. Float records fill `values`, byte records `bytes`.
struct TensorRecord {
  std::string name;
  DType dtype = DType::kFloat32;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
  std::vector<std::uint8_t> bytes;

  friend bool operator==(const TensorRecord&, const TensorRecord&) = default;
};

/// Little-endian container: magic "NOKSHA1\0", u32 version, u32 count, records, and a
/// trailing FNV-1a 64 checksum of everything before it.
std::vector<std::uint8_t> encode_records(const std::vector<TensorRecord>& records);

/// Wrong magic is UnsupportedFormatError, another version UnsupportedVersionError,
/// truncation or checksum mismatch IntegrityError.
std::vector<TensorRecord> decode_records(std::span<const std::uint8_t> bytes);

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

/// Everything needed to resume training or to serve the generator.
struct TrainingCheckpoint {
  TrainConfig config;
  /// Completed epochs and global steps.
  int epoch = 0;
  std::uint64_t step = 0;
  std::uint64_t rng_key = 0;
  std::uint64_t rng_counter = 0;
  model::ParameterList generator;
  model::ParameterList discriminator;
  std::optional<nn::AdamState<float>> generator_adam;
  std::optional<nn::AdamState<float>> discriminator_adam;
};

/// Record names: "generator/<param>", "discriminator/<param>",
/// "adam/{generator,discriminator}/{m,v}/<param>" and a "meta.json" byte record.
std::vector<TensorRecord> to_records(const TrainingCheckpoint& ckpt);
TrainingCheckpoint from_records(const std::vector<TensorRecord>& records);

/// Writes atomically (temporary file, then rename).
void save_checkpoint(const std::filesystem::path& path, const TrainingCheckpoint& ckpt);

/// Parameter names and shapes are checked against the stored config's architecture.
TrainingCheckpoint load_checkpoint(const std::filesystem::path& path);

/// A generator rebuilt from a checkpoint.
model::Generator restore_generator(const TrainingCheckpoint& ckpt);

}  // namespace noksha::train
