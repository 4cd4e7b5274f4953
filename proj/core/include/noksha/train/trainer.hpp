#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "noksha/dataset/manifest.hpp"
#include "noksha/model/pix2pix.hpp"
#include "noksha/nn/adam.hpp"
#include "noksha/train/checkpoint.hpp"
#include "noksha/train/config.hpp"

namespace noksha::train {

struct LossRecord {
  int epoch = 0;
  std::uint64_t step = 0;
  double d_loss = 0.0;
  double g_loss_total = 0.0;
  double g_loss_adv = 0.0;
  double l1 = 0.0;
  double wall_time = 0.0;

  friend bool operator==(const LossRecord&, const LossRecord&) = default;
};

/// One JSON object per line, keys in declaration order, no trailing newline.
std::string to_json_line(const LossRecord& r);
LossRecord loss_record_from_json(std::string_view line);
std::vector<LossRecord> read_loss_log(const std::filesystem::path& path);

/// Models, optimisers and progress of one training run.
struct TrainingSession {
  TrainConfig config;
  model::Generator generator;
  model::Discriminator discriminator;
  nn::Adam<float> generator_opt;
  nn::Adam<float> discriminator_opt;
  int epoch = 0;
  std::uint64_t step = 0;

  /// Freshly initialised networks, both seeded from config.seed.
  static TrainingSession create(const TrainConfig& config);
  /// Networks and optimiser moments from a checkpoint; `config` may extend the epoch count
  /// or move the output directory but must describe the same architecture.
  static TrainingSession resume(const TrainingCheckpoint& ckpt, const TrainConfig& config);

  TrainingCheckpoint checkpoint() const;
};

/// One discriminator update on (real, detached fake), then one generator update. Losses are
/// those measured before the respective update. `rng` drives the generator's dropout.
/// A non-finite output or loss raises NumericError naming it. epoch/step are left 0.
LossRecord train_step(TrainingSession& session, const nn::Tensor& condition, const nn::Tensor& target,
                      nn::CounterRng& rng);

struct TrainResult {
  std::vector<LossRecord> records;
  std::vector<std::filesystem::path> checkpoints;
  std::filesystem::path log_path;
  std::string summary;
};

using StepCallback = std::function<void(const LossRecord&)>;

/// Epochs over the manifest's train split in a per-epoch seeded order. Appends each step
/// to <out>/loss_log.jsonl and writes <out>/checkpoints/epoch_NNNN.ckpt every
/// checkpoint_every epochs and after the last one. With `resume`, training continues
/// after the checkpoint's epoch and log lines past its step are dropped first, so the
/// log matches an uninterrupted run.
TrainResult train(const TrainConfig& config, const std::optional<std::filesystem::path>& resume = std::nullopt,
                  const StepCallback& on_step = {});

/// "start d_loss 0.6226 g_loss 0.9080 l1 0.2728 | end d_loss ... g_loss ... l1 ...", each
/// value the mean over the first or last epoch in `records`.
std::string summary_line(const std::vector<LossRecord>& records);

/// Loss values at the start and end of the published training runs, per dataset variant.
/// Reference only: they come from different data and hardware and are never asserted.
struct PublishedLosses {
  std::string_view variant;
  std::array<double, 3> start;  // d_loss, g_loss, l1
  std::array<double, 3> end;
};
const std::vector<PublishedLosses>& published_losses();

using GeneratorFn = std::function<nn::Tensor(const nn::Tensor& condition, nn::CounterRng& rng)>;

struct EvalOptions {
  dataset::Split split = dataset::Split::kTest;
  std::uint64_t seed = 0;
  /// Triptychs and metrics.json go here when set.
  std::optional<std::filesystem::path> out_dir;
};

struct PairMetric {
  std::string id;
  double l1 = 0.0;
  std::filesystem::path triptych;
};

struct EvalResult {
  double mean_l1 = 0.0;
  std::vector<PairMetric> pairs;
};

/// Mean absolute difference between generated and target images in [-1, 1] units, at
/// `image_side`. Each pair's generator rng is derived from the seed and the pair id.
/// Triptychs are condition | generated | target, 768x256.
EvalResult evaluate(const GeneratorFn& generator, int image_side, const dataset::DatasetManifest& manifest,
                    const std::filesystem::path& manifest_dir, const EvalOptions& options);

EvalResult evaluate(const std::filesystem::path& checkpoint, const std::filesystem::path& manifest_path,
                    const EvalOptions& options);

/// Stable per-id stream for inference seeds.
std::uint64_t stream_of(std::string_view id);

}  // namespace noksha::train
