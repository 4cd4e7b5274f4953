#include "noksha/train/config.hpp"

#include "noksha/error.hpp"

namespace noksha::train {

namespace {

nlohmann::ordered_json adam_json(const nn::AdamConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"epsilon", c.epsilon}};
}

nn::AdamConfig adam_from(const nlohmann::json& j) {
  nn::AdamConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  return c;
}

void validate_adam(const nn::AdamConfig& c, const char* which) {
  if (!(c.learning_rate > 0.0) || !(c.beta1 >= 0.0 && c.beta1 < 1.0) || !(c.beta2 >= 0.0 && c.beta2 < 1.0) ||
      !(c.epsilon > 0.0)) {
    throw ConfigError(std::string(which) + " Adam settings are out of range");
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(lambda_l1 >= 0.0)) throw ConfigError("lambda_l1 must be non-negative");
  if (checkpoint_every < 1) throw ConfigError("checkpoint_every must be at least 1");
  validate_adam(generator_adam, "generator");
  validate_adam(discriminator_adam, "discriminator");
  generator.validate();
  discriminator.validate();
  if (discriminator.in_channels != generator.in_channels + generator.out_channels) {
    throw ConfigError("discriminator in_channels must equal condition plus image channels");
  }
}

TrainConfig TrainConfig::tiny() {
  TrainConfig c;
  c.generator.image_size = 64;
  c.generator.depth = 6;
  c.generator.base_filters = 16;
  c.discriminator.base_filters = 16;
  c.discriminator.layers = 3;
  return c;
}

nlohmann::ordered_json to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["manifest_path"] = c.manifest_path.generic_string();
  j["output_dir"] = c.output_dir.generic_string();
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["lambda_l1"] = c.lambda_l1;
  j["generator_adam"] = adam_json(c.generator_adam);
  j["discriminator_adam"] = adam_json(c.discriminator_adam);
  j["seed"] = c.seed;
  j["checkpoint_every"] = c.checkpoint_every;
  const auto& g = c.generator;
  j["generator"] = {{"in_channels", g.in_channels},   {"out_channels", g.out_channels},
                    {"base_filters", g.base_filters}, {"depth", g.depth},
                    {"image_size", g.image_size},     {"dropout_rate", g.dropout_rate},
                    {"dropout_levels", g.dropout_levels}, {"norm_epsilon", g.norm_epsilon}};
  const auto& d = c.discriminator;
  j["discriminator"] = {{"in_channels", d.in_channels},
                        {"base_filters", d.base_filters},
                        {"layers", d.layers},
                        {"norm_epsilon", d.norm_epsilon}};
  j["record_wall_time"] = c.record_wall_time;
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.manifest_path = j.at("manifest_path").get<std::string>();
    c.output_dir = j.at("output_dir").get<std::string>();
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.lambda_l1 = j.at("lambda_l1").get<double>();
    c.generator_adam = adam_from(j.at("generator_adam"));
    c.discriminator_adam = adam_from(j.at("discriminator_adam"));
    c.seed = j.at("seed").get<std::uint64_t>();
    c.checkpoint_every = j.at("checkpoint_every").get<int>();
    const auto& g = j.at("generator");
    c.generator.in_channels = g.at("in_channels").get<int>();
    c.generator.out_channels = g.at("out_channels").get<int>();
    c.generator.base_filters = g.at("base_filters").get<int>();
    c.generator.depth = g.at("depth").get<int>();
    c.generator.image_size = g.at("image_size").get<int>();
    c.generator.dropout_rate = g.at("dropout_rate").get<double>();
    c.generator.dropout_levels = g.at("dropout_levels").get<int>();
    c.generator.norm_epsilon = g.at("norm_epsilon").get<double>();
    const auto& d = j.at("discriminator");
    c.discriminator.in_channels = d.at("in_channels").get<int>();
    c.discriminator.base_filters = d.at("base_filters").get<int>();
    c.discriminator.layers = d.at("layers").get<int>();
    c.discriminator.norm_epsilon = d.at("norm_epsilon").get<double>();
    c.record_wall_time = j.value("record_wall_time", false);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed training config: ") + e.what());
  }
  return c;
}

}  // namespace noksha::train
