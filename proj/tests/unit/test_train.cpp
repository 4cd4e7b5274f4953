#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "noksha/dataset/pair.hpp"
#include "noksha/error.hpp"
#include "noksha/imaging/png.hpp"
#include "noksha/train/checkpoint.hpp"
#include "noksha/train/data.hpp"
#include "noksha/train/trainer.hpp"
#include "oracles.hpp"

namespace {

using namespace noksha;
using namespace noksha::train;
namespace fs = std::filesystem;
namespace nt = noksha::testing;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TrainConfig tiny_on(const fs::path& manifest, const fs::path& out, int epochs) {
  auto c = TrainConfig::tiny();
  c.manifest_path = manifest;
  c.output_dir = out;
  c.epochs = epochs;
  c.seed = 3;
  return c;
}

TEST(Checkpoint, ByteLayout) {
  TensorRecord r;
  r.name = "ab";
  r.dims = {2};
  r.values = {1.0F, -2.0F};
  const auto bytes = encode_records({r});

  std::vector<std::uint8_t> expect = {'N', 'O', 'K', 'S', 'H', 'A', '1', 0,  // magic
                                      1, 0, 0, 0,                             // version
                                      1, 0, 0, 0,                             // count
                                      2, 0, 'a', 'b',                         // name
                                      0, 1,                                   // dtype, rank
                                      2, 0, 0, 0,                             // dims
                                      0, 0, 0x80, 0x3f, 0, 0, 0, 0xc0};
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : expect) h = (h ^ b) * 0x100000001b3ULL;
  for (int i = 0; i < 8; ++i) expect.push_back(static_cast<std::uint8_t>(h >> (8 * i)));
  EXPECT_EQ(bytes, expect);
  EXPECT_EQ(decode_records(bytes), std::vector<TensorRecord>{r});
}

TEST(Checkpoint, RoundTripMixedRecords) {
  TensorRecord f{"w", DType::kFloat32, {2, 1, 3}, {0.5F, -0.0F, 1e-30F, 3.25F, -7.0F, 1e30F}, {}};
  TensorRecord b{"meta.json", DType::kBytes, {3}, {}, {'{', '}', '\n'}};
  TensorRecord scalar{"s", DType::kFloat32, {}, {42.0F}, {}};
  const std::vector<TensorRecord> recs{f, b, scalar};
  const auto back = decode_records(encode_records(recs));
  ASSERT_EQ(back, recs);
  EXPECT_TRUE(std::signbit(back[0].values[1]));
  EXPECT_THROW(encode_records({TensorRecord{"bad", DType::kFloat32, {4}, {1.0F}, {}}}), ShapeError);
}

TEST(Checkpoint, DecodeErrors) {
  TensorRecord r{"x", DType::kFloat32, {3}, {1, 2, 3}, {}};
  const auto good = encode_records({r});

  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_records(bad_magic), UnsupportedFormatError);
  EXPECT_THROW(decode_records(std::vector<std::uint8_t>{'N', 'O'}), UnsupportedFormatError);

  auto version = good;
  version[8] = 2;
  EXPECT_THROW(decode_records(version), UnsupportedVersionError);

  for (std::size_t cut : {good.size() - 1, good.size() - 9, std::size_t{20}}) {
    const std::vector<std::uint8_t> truncated(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_THROW(decode_records(truncated), IntegrityError) << cut;
  }
  for (std::size_t at = 12; at < good.size(); ++at) {
    auto flipped = good;
    flipped[at] ^= 0x10;
    EXPECT_THROW(decode_records(flipped), Error) << at;
  }
  auto payload = good;
  payload[good.size() - 10] ^= 1;
  EXPECT_THROW(decode_records(payload), IntegrityError);
}

class TrainData : public ::testing::Test {
 protected:
  nt::TempDir tmp_{"train"};
};

TEST_F(TrainData, SaveLoadReproducesForward) {
  auto cfg = TrainConfig::tiny();
  auto session = TrainingSession::create(cfg);
  session.epoch = 2;
  session.step = 17;
  const auto path = tmp_ / "a.ckpt";
  save_checkpoint(path, session.checkpoint());
  const auto ckpt = load_checkpoint(path);
  EXPECT_EQ(ckpt.epoch, 2);
  EXPECT_EQ(ckpt.step, 17u);

  const auto records = decode_records(imaging::read_file(path));
  const auto names = model::Generator::parameter_names(cfg.generator);
  std::size_t gen = 0;
  for (const auto& rec : records)
    if (rec.name.starts_with("generator/")) EXPECT_EQ(rec.name, "generator/" + names[gen++]);
  EXPECT_EQ(gen, names.size());

  const auto restored = restore_generator(ckpt);
  nn::CounterRng in(4);
  const auto x = nn::Tensor::uniform({1, 3, 64, 64}, in, -1.0F, 1.0F);
  nn::NoGradGuard ng;
  nn::CounterRng r1(9), r2(9);
  const auto a = session.generator.forward(x, model::Mode::kInfer, r1);
  const auto b = restored.forward(x, model::Mode::kInfer, r2);
  EXPECT_TRUE(std::ranges::equal(a.data(), b.data()));
}

TEST_F(TrainData, LoadRejectsArchitectureMismatch) {
  auto session = TrainingSession::create(TrainConfig::tiny());
  auto records = to_records(session.checkpoint());
  for (auto it = records.begin(); it != records.end(); ++it)
    if (it->name.starts_with("generator/")) {
      records.erase(it);
      break;
    }
  const auto path = tmp_ / "broken.ckpt";
  imaging::write_file(path, encode_records(records));
  EXPECT_THROW(load_checkpoint(path), IntegrityError);
  EXPECT_THROW(load_checkpoint(tmp_ / "missing.ckpt"), Error);
}

TEST_F(TrainData, StepIsDeterministic) {
  const auto manifest = nt::write_pair_dataset(tmp_.path(), 2, 2);
  const PairSet pairs(dataset::read_manifest(manifest), tmp_.path(), dataset::Split::kTrain);
  const auto [c, t] = pairs.tensors(0, 64);
  std::vector<LossRecord> out;
  for (int run = 0; run < 2; ++run) {
    auto s = TrainingSession::create(TrainConfig::tiny());
    nn::CounterRng rng(11);
    out.push_back(train_step(s, c, t, rng));
  }
  EXPECT_EQ(out[0], out[1]);
  EXPECT_GT(out[0].l1, 0.0);
  EXPECT_LE(out[0].l1, 2.0);
  EXPECT_NEAR(out[0].g_loss_total, out[0].g_loss_adv + 100.0 * out[0].l1, 1e-3);
}

TEST_F(TrainData, OverfitsOnePair) {
  const auto manifest = nt::write_pair_dataset(tmp_.path(), 1, 1);
  auto cfg = tiny_on(manifest, tmp_ / "run", 300);
  cfg.checkpoint_every = 1000;
  const auto result = train::train(cfg);
  ASSERT_EQ(result.records.size(), 300u);
  EXPECT_LT(result.records.back().l1, 0.1);
  EXPECT_LT(result.records.back().l1, result.records.front().l1);
  EXPECT_EQ(result.checkpoints.size(), 1u);
}

TEST_F(TrainData, LogAndCheckpoints) {
  const auto manifest = nt::write_pair_dataset(tmp_.path(), 5, 4);
  auto cfg = tiny_on(manifest, tmp_ / "run", 2);
  cfg.checkpoint_every = 5;
  int seen = 0;
  const auto result = train::train(cfg, std::nullopt, [&](const LossRecord&) { ++seen; });
  EXPECT_EQ(seen, 8);
  const auto log = read_loss_log(result.log_path);
  ASSERT_EQ(log, result.records);
  for (std::size_t i = 0; i < log.size(); ++i) {
    EXPECT_EQ(log[i].step, i + 1);
    EXPECT_EQ(log[i].epoch, i < 4 ? 1 : 2);
    EXPECT_EQ(log[i].wall_time, 0.0);
  }
  ASSERT_EQ(result.checkpoints.size(), 1u);
  EXPECT_EQ(result.checkpoints[0].filename(), "epoch_0002.ckpt");
  EXPECT_EQ(load_checkpoint(result.checkpoints[0]).step, 8u);
}

TEST_F(TrainData, ResumeMatchesUninterruptedRun) {
  const auto manifest = nt::write_pair_dataset(tmp_.path(), 4, 4);
  auto full = tiny_on(manifest, tmp_ / "full", 3);
  full.checkpoint_every = 1;
  const auto a = train::train(full);

  auto first = tiny_on(manifest, tmp_ / "split", 2);
  first.checkpoint_every = 1;
  train::train(first);
  auto rest = first;
  rest.epochs = 3;
  // Resume from epoch 1; the log lines of epoch 2 must be dropped and regenerated.
  const auto b = train::train(rest, tmp_ / "split" / "checkpoints" / "epoch_0001.ckpt");

  EXPECT_EQ(slurp(a.log_path), slurp(b.log_path));
  EXPECT_EQ(a.summary, b.summary);
  const auto ca = load_checkpoint(a.checkpoints.back());
  const auto cb = load_checkpoint(b.checkpoints.back());
  EXPECT_EQ(model::parameter_checksum(ca.generator), model::parameter_checksum(cb.generator));
  EXPECT_EQ(model::parameter_checksum(ca.discriminator), model::parameter_checksum(cb.discriminator));

  EXPECT_THROW(train::train(rest, b.checkpoints.back()), ConfigError);
}

TEST_F(TrainData, EmptyTrainSplitRejected) {
  const auto manifest = nt::write_pair_dataset(tmp_.path(), 2, 0);
  EXPECT_THROW(train::train(tiny_on(manifest, tmp_ / "run", 1)), ConfigError);
}

TEST(Trainer, SummaryLine) {
  std::vector<LossRecord> recs{{1, 1, 0.5, 1.0, 0.0, 0.25, 0.0}, {1, 2, 0.7, 3.0, 0.0, 0.35, 0.0},
                               {2, 3, 0.1, 0.2, 0.0, 0.05, 0.0}};
  EXPECT_EQ(summary_line(recs), "start d_loss 0.6000 g_loss 2.0000 l1 0.3000 | end d_loss 0.1000 g_loss 0.2000 l1 0.0500");
  EXPECT_EQ(published_losses().size(), 5u);
}

TEST(Trainer, LossRecordJson) {
  const LossRecord r{3, 41, 0.125, 1.5, -0.25, 0.0078125, 0.0};
  const auto line = to_json_line(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(line.rfind("{\"epoch\":3,\"step\":41,\"d_loss\":", 0), 0u);
  EXPECT_EQ(loss_record_from_json(line), r);
  EXPECT_THROW(loss_record_from_json("{\"epoch\":"), DecodeError);
}

TEST_F(TrainData, EvaluateByHand) {
  const auto manifest_path = nt::write_pair_dataset(tmp_.path(), 3, 1);
  const auto manifest = dataset::read_manifest(manifest_path);

  // Identity generator at full resolution: L1 is the mean |cond - target| over RGB.
  EvalOptions opts;
  opts.out_dir = tmp_ / "eval";
  const auto r = evaluate([](const nn::Tensor& c, nn::CounterRng&) { return c; }, 256, manifest, tmp_.path(), opts);
  ASSERT_EQ(r.pairs.size(), 2u);
  double mean = 0.0;
  for (const auto& p : r.pairs) {
    const auto [cond, target] = dataset::split_pair(imaging::read_png(tmp_ / ("pairs/" + p.id + ".png")));
    double acc = 0.0;
    for (int y = 0; y < 256; ++y)
      for (int x = 0; x < 256; ++x)
        for (int ch = 0; ch < 3; ++ch)
          acc += std::abs(cond.at(x, y, cond.channels() == 1 ? 0 : ch) - target.at(x, y, ch)) / 127.5;
    const double expect = acc / (3.0 * 256 * 256);
    EXPECT_NEAR(p.l1, expect, 1e-6) << p.id;
    mean += expect / 2.0;
    const auto tri = imaging::read_png(p.triptych);
    EXPECT_EQ(tri.width(), 768);
    EXPECT_EQ(tri.height(), 256);
  }
  EXPECT_NEAR(r.mean_l1, mean, 1e-6);
  EXPECT_TRUE(fs::exists(tmp_ / "eval" / "metrics.json"));

  EvalOptions train_split;
  train_split.split = dataset::Split::kTrain;
  const auto zero = evaluate(
      [&](const nn::Tensor&, nn::CounterRng&) {
        const PairSet ps(manifest, tmp_.path(), dataset::Split::kTrain);
        return ps.tensors(0, 64).second;
      },
      64, manifest, tmp_.path(), train_split);
  EXPECT_EQ(zero.mean_l1, 0.0);
}

TEST(Data, TensorMapping) {
  imaging::RasterImage img(2, 1, 1);
  img.at(0, 0) = 0;
  img.at(1, 0) = 255;
  const auto t = image_to_tensor(img, 2);
  EXPECT_EQ(t.shape(), (nn::Shape{1, 3, 2, 2}));
  EXPECT_EQ(t.data()[0], -1.0F);
  EXPECT_EQ(t.data()[1], 1.0F);
  const auto back = tensor_to_image(t);
  EXPECT_EQ(back.channels(), 3);
  EXPECT_EQ(back.at(1, 1, 2), 255);
}

}  // namespace
