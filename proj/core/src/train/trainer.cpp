#include "noksha/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "noksha/error.hpp"
#include "noksha/imaging/ops.hpp"
#include "noksha/imaging/png.hpp"
#include "noksha/nn/ops.hpp"
#include "noksha/train/data.hpp"

namespace noksha::train {

namespace fs = std::filesystem;
using nn::CounterRng;
using nn::Tensor;

namespace {

constexpr std::uint64_t kTrainStream = 0x747261696eULL;
constexpr std::uint64_t kStepStreamBase = 1ULL << 40;
constexpr const char* kLogName = "loss_log.jsonl";

// Keeps a network's parameters out of the graph while another network's loss is
// back-propagated through it.
class FreezeGuard {
 public:
  explicit FreezeGuard(model::ParameterList& params) : params_(params) {
    for (auto& p : params_) p.tensor.set_requires_grad(false);
  }
  ~FreezeGuard() {
    for (auto& p : params_) p.tensor.set_requires_grad(true);
  }
  FreezeGuard(const FreezeGuard&) = delete;
  FreezeGuard& operator=(const FreezeGuard&) = delete;

 private:
  model::ParameterList& params_;
};

void require_finite(const Tensor& t, const std::string& name) {
  for (const float v : t.data()) {
    if (!std::isfinite(v)) throw NumericError(name, "non-finite value in " + name);
  }
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::vector<std::uint8_t> as_bytes(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace

std::string to_json_line(const LossRecord& r) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["step"] = r.step;
  j["d_loss"] = r.d_loss;
  j["g_loss_total"] = r.g_loss_total;
  j["g_loss_adv"] = r.g_loss_adv;
  j["l1"] = r.l1;
  j["wall_time"] = r.wall_time;
  return j.dump();
}

LossRecord loss_record_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    LossRecord r;
    r.epoch = j.at("epoch").get<int>();
    r.step = j.at("step").get<std::uint64_t>();
    r.d_loss = j.at("d_loss").get<double>();
    r.g_loss_total = j.at("g_loss_total").get<double>();
    r.g_loss_adv = j.at("g_loss_adv").get<double>();
    r.l1 = j.at("l1").get<double>();
    r.wall_time = j.at("wall_time").get<double>();
    return r;
  } catch (const nlohmann::json::parse_error& e) {
    throw DecodeError(std::string("malformed loss record: ") + e.what(), e.byte);
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("malformed loss record: ") + e.what(), 0);
  }
}

std::vector<LossRecord> read_loss_log(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read loss log " + path.string());
  std::vector<LossRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(loss_record_from_json(line));
  }
  return out;
}

TrainingSession TrainingSession::create(const TrainConfig& config) {
  config.validate();
  model::Generator g(config.generator, config.seed);
  model::Discriminator d(config.discriminator, config.seed);
  nn::Adam<float> g_opt(model::tensors_of(g.parameters()), config.generator_adam);
  nn::Adam<float> d_opt(model::tensors_of(d.parameters()), config.discriminator_adam);
  return TrainingSession{config, std::move(g), std::move(d), std::move(g_opt), std::move(d_opt), 0, 0};
}

TrainingSession TrainingSession::resume(const TrainingCheckpoint& ckpt, const TrainConfig& config) {
  if (!(config.generator == ckpt.config.generator) || !(config.discriminator == ckpt.config.discriminator)) {
    throw ConfigError("resume config describes a different architecture than the checkpoint");
  }
  TrainingSession s = create(config);
  model::assign_parameters(s.generator.parameters(), ckpt.generator);
  model::assign_parameters(s.discriminator.parameters(), ckpt.discriminator);
  if (!ckpt.generator_adam || !ckpt.discriminator_adam) {
    throw IntegrityError("checkpoint carries no optimiser state to resume from");
  }
  auto g_state = *ckpt.generator_adam;
  auto d_state = *ckpt.discriminator_adam;
  g_state.config = config.generator_adam;
  d_state.config = config.discriminator_adam;
  s.generator_opt.load_state(std::move(g_state));
  s.discriminator_opt.load_state(std::move(d_state));
  s.epoch = ckpt.epoch;
  s.step = ckpt.step;
  return s;
}

TrainingCheckpoint TrainingSession::checkpoint() const {
  TrainingCheckpoint c;
  c.config = config;
  c.epoch = epoch;
  c.step = step;
  const CounterRng root = CounterRng(config.seed).split(kTrainStream);
  c.rng_key = root.key();
  c.rng_counter = root.counter();
  c.generator = generator.parameters();
  c.discriminator = discriminator.parameters();
  c.generator_adam = generator_opt.state();
  c.discriminator_adam = discriminator_opt.state();
  return c;
}

LossRecord train_step(TrainingSession& session, const Tensor& condition, const Tensor& target, CounterRng& rng) {
  auto& gen = session.generator;
  auto& disc = session.discriminator;

  const Tensor fake = gen.forward(condition, model::Mode::kTrain, rng);
  require_finite(fake, "generator output");

  session.discriminator_opt.zero_grad();
  const Tensor real_logits = disc.forward(condition, target);
  const Tensor fake_logits = disc.forward(condition, fake.detach());
  const Tensor d_loss = model::discriminator_loss(real_logits, fake_logits);
  require_finite(d_loss, "d_loss");
  nn::backward(d_loss);
  session.discriminator_opt.step();

  session.generator_opt.zero_grad();
  model::GeneratorLoss g_loss;
  {
    FreezeGuard frozen(disc.parameters());
    const Tensor logits = disc.forward(condition, fake);
    g_loss = model::generator_loss(logits, fake, target, model::LossWeights{session.config.lambda_l1});
    require_finite(nn::Tensor::scalar(g_loss.adversarial), "g_loss_adv");
    require_finite(nn::Tensor::scalar(g_loss.l1), "l1");
    require_finite(g_loss.total, "g_loss_total");
    nn::backward(g_loss.total);
  }
  session.generator_opt.step();

  LossRecord r;
  r.d_loss = d_loss.item();
  r.g_loss_total = g_loss.total.item();
  r.g_loss_adv = g_loss.adversarial;
  r.l1 = g_loss.l1;
  return r;
}

std::string summary_line(const std::vector<LossRecord>& records) {
  if (records.empty()) return "no steps recorded";
  auto epoch_mean = [&records](int epoch) {
    std::array<double, 3> sum{};
    int n = 0;
    for (const auto& r : records) {
      if (r.epoch != epoch) continue;
      sum[0] += r.d_loss;
      sum[1] += r.g_loss_total;
      sum[2] += r.l1;
      ++n;
    }
    for (auto& v : sum) v /= n;
    return sum;
  };
  const auto a = epoch_mean(records.front().epoch);
  const auto b = epoch_mean(records.back().epoch);
  return "start d_loss " + fixed4(a[0]) + " g_loss " + fixed4(a[1]) + " l1 " + fixed4(a[2]) + " | end d_loss " +
         fixed4(b[0]) + " g_loss " + fixed4(b[1]) + " l1 " + fixed4(b[2]);
}

TrainResult train(const TrainConfig& config, const std::optional<fs::path>& resume, const StepCallback& on_step) {
  config.validate();
  const auto manifest = dataset::read_manifest(config.manifest_path);
  const PairSet pairs(manifest, config.manifest_path.parent_path(), dataset::Split::kTrain);
  if (pairs.size() == 0) throw ConfigError("manifest " + config.manifest_path.string() + " has no training pairs");

  TrainingSession session = [&] {
    if (!resume) return TrainingSession::create(config);
    return TrainingSession::resume(load_checkpoint(*resume), config);
  }();
  if (session.epoch >= config.epochs) {
    throw ConfigError("checkpoint is already at epoch " + std::to_string(session.epoch) + " of " +
                      std::to_string(config.epochs));
  }

  TrainResult result;
  std::error_code ec;
  fs::create_directories(config.output_dir / "checkpoints", ec);
  if (ec) throw IoError("cannot create output directory " + config.output_dir.string() + ": " + ec.message());
  result.log_path = config.output_dir / kLogName;

  // Keep only log lines the checkpoint already accounts for.
  std::vector<std::string> kept;
  std::vector<LossRecord> history;
  if (fs::exists(result.log_path)) {
    std::ifstream in(result.log_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto rec = loss_record_from_json(line);
      if (rec.step > session.step) continue;
      kept.push_back(line);
      history.push_back(rec);
    }
  }
  std::ofstream log(result.log_path, std::ios::trunc);
  if (!log) throw IoError("cannot write loss log " + result.log_path.string());
  for (const auto& line : kept) log << line << '\n';
  log.flush();

  const CounterRng root = CounterRng(config.seed).split(kTrainStream);
  const int side = config.generator.image_size;
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const auto started = std::chrono::steady_clock::now();

  for (int epoch = session.epoch + 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    CounterRng order_rng = root.split(static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i-- > 1;) std::swap(order[i], order[order_rng.below(i + 1)]);

    for (std::size_t at = 0; at < order.size(); at += batch) {
      std::vector<Tensor> conds, targets;
      for (std::size_t k = at; k < std::min(order.size(), at + batch); ++k) {
        auto [c, t] = pairs.tensors(order[k], side);
        conds.push_back(std::move(c));
        targets.push_back(std::move(t));
      }
      ++session.step;
      CounterRng step_rng = root.split(kStepStreamBase + session.step);
      LossRecord rec = train_step(session, stack_batch(conds), stack_batch(targets), step_rng);
      rec.epoch = epoch;
      rec.step = session.step;
      if (config.record_wall_time) {
        rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      }
      log << to_json_line(rec) << '\n';
      log.flush();
      if (!log) throw IoError("write to " + result.log_path.string() + " failed");
      if (on_step) on_step(rec);
      result.records.push_back(rec);
    }
    session.epoch = epoch;

    if (epoch % config.checkpoint_every == 0 || epoch == config.epochs) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%04d.ckpt", epoch);
      const fs::path path = config.output_dir / "checkpoints" / name;
      save_checkpoint(path, session.checkpoint());
      result.checkpoints.push_back(path);
    }
  }
  // The summary spans the whole run, including steps from before a resume.
  history.insert(history.end(), result.records.begin(), result.records.end());
  result.summary = summary_line(history);
  return result;
}

const std::vector<PublishedLosses>& published_losses() {
  static const std::vector<PublishedLosses> table{
      {"boundary", {0.6226, 0.908, 0.2728}, {0.8952, 2.104, 0.975}},
      {"enhanced", {0.5801, 0.9881, 0.2246}, {0.8635, 1.77, 0.1239}},
      {"reduced", {0.9196, 0.9882, 0.2189}, {0.2205, 5.235, 0.11}},
      {"skeleton", {-1.379, -5.886e-3, 0.1734}, {-1.385, -1.5e-4, 0.08392}},
      {"sketch", {-0.7185, -0.1069, 0.2526}, {-1.362, -0.0173, 0.0885}},
  };
  return table;
}

std::uint64_t stream_of(std::string_view id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : id) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

EvalResult evaluate(const GeneratorFn& generator, int image_side, const dataset::DatasetManifest& manifest,
                    const fs::path& manifest_dir, const EvalOptions& options) {
  const PairSet pairs(manifest, manifest_dir, options.split);
  if (pairs.size() == 0) {
    throw ConfigError("manifest has no " + std::string(dataset::to_string(options.split)) + " pairs");
  }
  if (options.out_dir) fs::create_directories(*options.out_dir);

  nn::NoGradGuard no_grad;
  EvalResult result;
  const CounterRng base(options.seed);
  nlohmann::ordered_json per_pair = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& entry = pairs.entry(i);
    const auto [condition, target] = pairs.halves(i);
    const Tensor cond_t = image_to_tensor(condition, image_side);
    const Tensor target_t = image_to_tensor(target, image_side);
    CounterRng rng = base.split(stream_of(entry.id));
    const Tensor fake = generator(cond_t, rng);
    if (fake.shape() != target_t.shape()) {
      throw ShapeError("generator produced " + nn::shape_string(fake.shape()) + " for target " +
                       nn::shape_string(target_t.shape()));
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < fake.numel(); ++k) acc += std::abs(double(fake.data()[k]) - target_t.data()[k]);
    PairMetric m{entry.id, acc / static_cast<double>(fake.numel()), {}};

    if (options.out_dir) {
      imaging::RasterImage generated = tensor_to_image(fake);
      if (generated.width() != dataset::kPairSide) {
        generated = imaging::resize(generated, dataset::kPairSide, dataset::kPairSide, imaging::ResizeMode::kBilinear);
      }
      imaging::RasterImage tri(3 * dataset::kPairSide, dataset::kPairSide, 3);
      imaging::paste(tri, imaging::to_rgb(condition), 0, 0);
      imaging::paste(tri, generated, dataset::kPairSide, 0);
      imaging::paste(tri, imaging::to_rgb(target), 2 * dataset::kPairSide, 0);
      m.triptych = *options.out_dir / (entry.id + "_triptych.png");
      imaging::write_png(m.triptych, tri);
    }
    per_pair.push_back({{"id", m.id}, {"l1", m.l1}});
    result.pairs.push_back(std::move(m));
  }
  double total = 0.0;
  for (const auto& p : result.pairs) total += p.l1;
  result.mean_l1 = total / static_cast<double>(result.pairs.size());

  if (options.out_dir) {
    nlohmann::ordered_json doc;
    doc["split"] = std::string(dataset::to_string(options.split));
    doc["seed"] = options.seed;
    doc["mean_l1"] = result.mean_l1;
    doc["pairs"] = std::move(per_pair);
    imaging::write_file(*options.out_dir / "metrics.json", as_bytes(doc.dump(2) + "\n"));
  }
  return result;
}

EvalResult evaluate(const fs::path& checkpoint, const fs::path& manifest_path, const EvalOptions& options) {
  const TrainingCheckpoint ckpt = load_checkpoint(checkpoint);
  const model::Generator gen = restore_generator(ckpt);
  const auto manifest = dataset::read_manifest(manifest_path);
  const GeneratorFn fn = [&gen](const Tensor& c, CounterRng& rng) {
    return gen.forward(c, model::Mode::kInfer, rng);
  };
  return evaluate(fn, ckpt.config.generator.image_size, manifest, manifest_path.parent_path(), options);
}

}  // namespace noksha::train
