#include "noksha/model/pix2pix.hpp"

#include <algorithm>
#include <cstring>

#include "noksha/error.hpp"
#include "noksha/nn/ops.hpp"

namespace noksha::model {

namespace {

constexpr float kInitStd = 0.02F;
constexpr float kLeakySlope = 0.2F;
const nn::ConvOptions kDown{2, 1};
constexpr std::size_t kKernel = 4;

int filters_at(int base, int level) { return base * (1 << std::min(level - 1, 3)); }

struct ParamBuilder {
  ParameterList& params;
  CounterRng& rng;

  std::size_t add(std::string name, nn::Shape shape, float mean, float stddev) {
    Tensor t = stddev > 0.0F ? Tensor::randn(std::move(shape), rng, mean, stddev)
                             : Tensor(std::move(shape), mean);
    t.set_requires_grad(true);
    params.push_back({std::move(name), std::move(t)});
    return params.size() - 1;
  }
  void add_norm(const std::string& prefix, std::size_t channels, int& gamma, int& beta) {
    gamma = static_cast<int>(add(prefix + ".norm.gamma", {channels}, 1.0F, kInitStd));
    beta = static_cast<int>(add(prefix + ".norm.beta", {channels}, 0.0F, 0.0F));
  }
};

std::size_t sz(int v) { return static_cast<std::size_t>(v); }

}  // namespace

std::vector<Tensor> tensors_of(const ParameterList& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.tensor);
  return out;
}

std::uint64_t parameter_checksum(const ParameterList& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : params) {
    const auto data = p.tensor.data();
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
    for (std::size_t i = 0; i < data.size_bytes(); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

void assign_parameters(ParameterList& dst, const ParameterList& src) {
  if (dst.size() != src.size()) {
    throw IntegrityError("expected " + std::to_string(dst.size()) + " parameters, got " +
                         std::to_string(src.size()));
  }
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i].name != src[i].name) {
      throw IntegrityError("parameter " + std::to_string(i) + " is '" + src[i].name + "', expected '" +
                           dst[i].name + "'");
    }
    if (dst[i].tensor.shape() != src[i].tensor.shape()) {
      throw IntegrityError("parameter '" + dst[i].name + "' has shape " +
                           nn::shape_string(src[i].tensor.shape()) + ", expected " +
                           nn::shape_string(dst[i].tensor.shape()));
    }
  }
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const auto from = src[i].tensor.data();
    std::copy(from.begin(), from.end(), dst[i].tensor.mutable_data().begin());
  }
}

void GeneratorConfig::validate() const {
  if (in_channels < 1 || out_channels < 1 || base_filters < 1) {
    throw ConfigError("generator channel counts must be positive");
  }
  if (depth < 2) throw ConfigError("generator depth must be at least 2");
  if (depth > 30 || image_size < 1 || image_size % (1 << depth) != 0) {
    throw ConfigError("image side " + std::to_string(image_size) + " is not divisible by 2^" +
                      std::to_string(depth));
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
  if (dropout_levels < 0) throw ConfigError("dropout_levels must be non-negative");
}

void DiscriminatorConfig::validate() const {
  if (in_channels < 1 || base_filters < 1) throw ConfigError("discriminator channel counts must be positive");
  if (layers < 1) throw ConfigError("discriminator needs at least one layer");
}

std::vector<std::string> Generator::parameter_names(const GeneratorConfig& config) {
  config.validate();
  std::vector<std::string> names;
  const int d = config.depth;
  for (int i = 1; i <= d; ++i) {
    const std::string p = "enc" + std::to_string(i);
    names.push_back(p + ".weight");
    names.push_back(p + ".bias");
    if (i > 1 && i < d) {
      names.push_back(p + ".norm.gamma");
      names.push_back(p + ".norm.beta");
    }
  }
  for (int j = d; j >= 1; --j) {
    const std::string p = "dec" + std::to_string(j);
    names.push_back(p + ".weight");
    names.push_back(p + ".bias");
    if (j > 1) {
      names.push_back(p + ".norm.gamma");
      names.push_back(p + ".norm.beta");
    }
  }
  return names;
}

Generator::Generator(const GeneratorConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  CounterRng rng = CounterRng(seed).split(0x67656eULL);
  ParamBuilder pb{params_, rng};
  const int d = config_.depth;
  const int base = config_.base_filters;

  for (int i = 1; i <= d; ++i) {
    const std::string p = "enc" + std::to_string(i);
    const int cin = i == 1 ? config_.in_channels : filters_at(base, i - 1);
    const int cout = filters_at(base, i);
    Level level;
    level.weight = pb.add(p + ".weight", {sz(cout), sz(cin), kKernel, kKernel}, 0.0F, kInitStd);
    level.bias = pb.add(p + ".bias", {sz(cout)}, 0.0F, 0.0F);
    if (i > 1 && i < d) pb.add_norm(p, sz(cout), level.gamma, level.beta);
    encoder_.push_back(level);
  }
  decoder_.resize(sz(d));
  for (int j = d; j >= 1; --j) {
    const std::string p = "dec" + std::to_string(j);
    // Level j maps the side of encoder level j up to that of level j-1.
    const int cin = j == d ? filters_at(base, d) : 2 * filters_at(base, j);
    const int cout = j == 1 ? config_.out_channels : filters_at(base, j - 1);
    Level level;
    level.weight = pb.add(p + ".weight", {sz(cin), sz(cout), kKernel, kKernel}, 0.0F, kInitStd);
    level.bias = pb.add(p + ".bias", {sz(cout)}, 0.0F, 0.0F);
    if (j > 1) pb.add_norm(p, sz(cout), level.gamma, level.beta);
    decoder_[sz(j - 1)] = level;
  }
}

Tensor Generator::forward(const Tensor& condition, Mode /*mode*/, CounterRng& rng,
                          std::vector<nn::Shape>* encoder_shapes) const {
  const auto& s = condition.shape();
  if (s.size() != 4 || s[1] != sz(config_.in_channels) || s[2] != sz(config_.image_size) ||
      s[3] != sz(config_.image_size)) {
    throw ShapeError("generator expects (N," + std::to_string(config_.in_channels) + "," +
                     std::to_string(config_.image_size) + "," + std::to_string(config_.image_size) +
                     ") input, got " + nn::shape_string(s));
  }
  const float eps = static_cast<float>(config_.norm_epsilon);
  auto param = [this](std::size_t i) -> const Tensor& { return params_[i].tensor; };

  std::vector<Tensor> skips;
  Tensor x = condition;
  for (const auto& level : encoder_) {
    x = nn::conv2d(x, param(level.weight), std::optional<Tensor>(param(level.bias)), kDown);
    if (level.gamma >= 0) x = nn::instance_norm(x, param(sz(level.gamma)), param(sz(level.beta)), eps);
    x = nn::leaky_relu(x, kLeakySlope);
    if (encoder_shapes) encoder_shapes->push_back(x.shape());
    skips.push_back(x);
  }

  const int d = config_.depth;
  for (int j = d; j >= 1; --j) {
    const auto& level = decoder_[sz(j - 1)];
    if (j < d) x = nn::concat_channels(x, skips[sz(j - 1)]);
    x = nn::conv_transpose2d(x, param(level.weight), std::optional<Tensor>(param(level.bias)), kDown);
    if (j == 1) break;
    x = nn::instance_norm(x, param(sz(level.gamma)), param(sz(level.beta)), eps);
    x = nn::relu(x);
    if (d - j < config_.dropout_levels) x = nn::dropout(x, config_.dropout_rate, rng);
  }
  return nn::tanh(x);
}

std::vector<std::string> Discriminator::parameter_names(const DiscriminatorConfig& config) {
  config.validate();
  std::vector<std::string> names;
  for (int i = 1; i <= config.layers; ++i) {
    const std::string p = "conv" + std::to_string(i);
    names.push_back(p + ".weight");
    names.push_back(p + ".bias");
    if (i > 1) {
      names.push_back(p + ".norm.gamma");
      names.push_back(p + ".norm.beta");
    }
  }
  names.push_back("head.weight");
  names.push_back("head.bias");
  return names;
}

int Discriminator::output_side(const DiscriminatorConfig& config, int input_side) {
  int side = input_side;
  for (int i = 1; i <= config.layers; ++i) side = i < config.layers ? side / 2 : side - 1;
  return side - 1;
}

Discriminator::Discriminator(const DiscriminatorConfig& config, std::uint64_t seed)
    : config_(config) {
  config_.validate();
  CounterRng rng = CounterRng(seed).split(0x646973ULL);
  ParamBuilder pb{params_, rng};
  int cin = config_.in_channels;
  for (int i = 1; i <= config_.layers; ++i) {
    const std::string p = "conv" + std::to_string(i);
    const int cout = filters_at(config_.base_filters, i);
    Layer layer;
    layer.weight = pb.add(p + ".weight", {sz(cout), sz(cin), kKernel, kKernel}, 0.0F, kInitStd);
    layer.bias = pb.add(p + ".bias", {sz(cout)}, 0.0F, 0.0F);
    if (i > 1) pb.add_norm(p, sz(cout), layer.gamma, layer.beta);
    layer.stride = i < config_.layers ? 2 : 1;
    layers_.push_back(layer);
    cin = cout;
  }
  Layer head;
  head.weight = pb.add("head.weight", {1, sz(cin), kKernel, kKernel}, 0.0F, kInitStd);
  head.bias = pb.add("head.bias", {1}, 0.0F, 0.0F);
  head.stride = 1;
  layers_.push_back(head);
}

Tensor Discriminator::forward(const Tensor& condition, const Tensor& image) const {
  Tensor x = nn::concat_channels(condition, image);
  if (x.dim(1) != sz(config_.in_channels)) {
    throw ShapeError("discriminator expects " + std::to_string(config_.in_channels) +
                     " input channels, got " + nn::shape_string(x.shape()));
  }
  const float eps = static_cast<float>(config_.norm_epsilon);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    x = nn::conv2d(x, params_[layer.weight].tensor, std::optional<Tensor>(params_[layer.bias].tensor),
                   nn::ConvOptions{layer.stride, 1});
    if (i + 1 == layers_.size()) break;
    if (layer.gamma >= 0)
      x = nn::instance_norm(x, params_[sz(layer.gamma)].tensor, params_[sz(layer.beta)].tensor, eps);
    x = nn::leaky_relu(x, kLeakySlope);
  }
  return x;
}

Tensor discriminator_loss(const Tensor& real_logits, const Tensor& fake_logits) {
  if (real_logits.shape() != fake_logits.shape()) {
    throw ShapeError("discriminator_loss: real " + nn::shape_string(real_logits.shape()) +
                     " vs fake " + nn::shape_string(fake_logits.shape()));
  }
  return nn::add(nn::bce_with_logits(real_logits, 1.0F), nn::bce_with_logits(fake_logits, 0.0F));
}

GeneratorLoss generator_loss(const Tensor& fake_logits, const Tensor& fake, const Tensor& target,
                             const LossWeights& weights) {
  if (weights.lambda_l1 < 0.0) throw ConfigError("lambda_l1 must be non-negative");
  const Tensor adv = nn::bce_with_logits(fake_logits, 1.0F);
  const Tensor l1 = nn::l1_loss(fake, target);
  GeneratorLoss out;
  out.total = nn::add(adv, nn::scale(l1, static_cast<float>(weights.lambda_l1)));
  out.adversarial = adv.item();
  out.l1 = l1.item();
  return out;
}

}  // namespace noksha::model
