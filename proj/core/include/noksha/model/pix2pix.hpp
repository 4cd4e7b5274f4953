#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "noksha/nn/rng.hpp"
#include "noksha/nn/tensor.hpp"

namespace noksha::model {

using nn::CounterRng;
using nn::Tensor;

struct Parameter {
  std::string name;
  Tensor tensor;
};

/// Ordered, named trainable tensors of one network.
using ParameterList = std::vector<Parameter>;

std::vector<Tensor> tensors_of(const ParameterList& params);

/// FNV-1a over the raw bytes of every parameter, in order.
std::uint64_t parameter_checksum(const ParameterList& params);

/// Copies values from `src` into `dst` in place. Names, order and shapes must agree
/// (IntegrityError otherwise), so a loaded set can only land on the architecture it came from.
void assign_parameters(ParameterList& dst, const ParameterList& src);

struct GeneratorConfig {
  int in_channels = 3;
  int out_channels = 3;
  int base_filters = 64;
  /// Encoder levels; each halves the side. 8 takes 256 down to a 1x1 bottleneck.
  int depth = 8;
  /// Side length of the square images the network is built for.
  int image_size = 256;
  double dropout_rate = 0.5;
  /// Number of innermost decoder levels that apply dropout.
  int dropout_levels = 3;
  double norm_epsilon = 1e-5;

  void validate() const;
  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

struct DiscriminatorConfig {
  /// Condition channels plus image channels.
  int in_channels = 6;
  int base_filters = 64;
  /// Convolution layers before the 1-channel head; all but the last use stride 2.
  int layers = 4;
  double norm_epsilon = 1e-5;

  void validate() const;
  friend bool operator==(const DiscriminatorConfig&, const DiscriminatorConfig&) = default;
};

struct LossWeights {
  double lambda_l1 = 100.0;
};

enum class Mode { kTrain, kInfer };

/// U-shaped encoder/decoder with channel-concatenated skips and a tanh output.
///
/// Encoder level i: conv(k4, s2, p1) -> instance norm -> leaky_relu(0.2); the first
/// and the innermost level have no norm. Decoder level: conv_transpose(k4, s2, p1) ->
/// norm -> relu, with dropout on the innermost `dropout_levels`, each fed the previous
/// decoder output concatenated with the mirrored encoder output.
class Generator {
 public:
  /// Parameters drawn from N(0, 0.02) (norm gains from N(1, 0.02), biases zero).
  Generator(const GeneratorConfig& config, std::uint64_t seed);

  /// `condition` is (N, in_channels, S, S) in [-1, 1]. Dropout is active in both modes;
  /// it is the noise source, so `rng` decides the sample. Mode only documents intent.
  /// `encoder_shapes`, when given, receives the output shape of every encoder level.
  Tensor forward(const Tensor& condition, Mode mode, CounterRng& rng,
                 std::vector<nn::Shape>* encoder_shapes = nullptr) const;

  const GeneratorConfig& config() const noexcept { return config_; }
  const ParameterList& parameters() const noexcept { return params_; }
  ParameterList& parameters() noexcept { return params_; }

  /// Expected parameter names, in order, for a config.
  static std::vector<std::string> parameter_names(const GeneratorConfig& config);

 private:
  struct Level {
    std::size_t weight, bias;
    int gamma = -1, beta = -1;
  };
  GeneratorConfig config_;
  ParameterList params_;
  std::vector<Level> encoder_;
  std::vector<Level> decoder_;  // decoder_[0] produces the full-resolution output
};

/// Patch classifier: a grid of logits over the concatenated (condition, image).
class Discriminator {
 public:
  Discriminator(const DiscriminatorConfig& config, std::uint64_t seed);

  Tensor forward(const Tensor& condition, const Tensor& image) const;

  const DiscriminatorConfig& config() const noexcept { return config_; }
  const ParameterList& parameters() const noexcept { return params_; }
  ParameterList& parameters() noexcept { return params_; }

  static std::vector<std::string> parameter_names(const DiscriminatorConfig& config);

  /// Logit grid side for a square input side.
  static int output_side(const DiscriminatorConfig& config, int input_side);

 private:
  struct Layer {
    std::size_t weight, bias;
    int gamma = -1, beta = -1;
    int stride = 2;
  };
  DiscriminatorConfig config_;
  ParameterList params_;
  std::vector<Layer> layers_;  // last entry is the head
};

/// bce(real, 1) + bce(fake, 0), each averaged over patches.
Tensor discriminator_loss(const Tensor& real_logits, const Tensor& fake_logits);

struct GeneratorLoss {
  /// adv + lambda * l1, differentiable.
  Tensor total;
  float adversarial = 0.0F;
  float l1 = 0.0F;
};

/// Non-saturating adversarial term bce(fake, 1) plus lambda-weighted L1 to the target.
GeneratorLoss generator_loss(const Tensor& fake_logits, const Tensor& fake, const Tensor& target,
                             const LossWeights& weights);

}  // namespace noksha::model
