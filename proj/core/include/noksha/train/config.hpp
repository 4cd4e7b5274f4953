#pragma once

#include <cstdint>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "noksha/model/pix2pix.hpp"
#include "noksha/nn/adam.hpp"

namespace noksha::train {

struct TrainConfig {
  std::filesystem::path manifest_path;
  std::filesystem::path output_dir;
  int epochs = 100;
  int batch_size = 1;
  double lambda_l1 = 100.0;
  nn::AdamConfig generator_adam;
  nn::AdamConfig discriminator_adam;
  std::uint64_t seed = 0;
  /// A checkpoint every this many epochs; the final epoch is always saved.
  int checkpoint_every = 10;
  model::GeneratorConfig generator;
  model::DiscriminatorConfig discriminator;
  /// Off keeps the loss log a pure function of seed, config and data (wall_time = 0).
  bool record_wall_time = false;

  void validate() const;

  /// 64x64 images, depth 6, narrow filters: small enough for CPU tests.
  static TrainConfig tiny();
};

nlohmann::ordered_json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace noksha::train
