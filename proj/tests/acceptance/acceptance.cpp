// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Usage: acceptance [--cli <path to noksha>] [--only <substring>]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "noksha/dataset/builder.hpp"
#include "noksha/dataset/manifest.hpp"
#include "noksha/error.hpp"
#include "noksha/imaging/morphology.hpp"
#include "noksha/imaging/png.hpp"
#include "noksha/model/pix2pix.hpp"
#include "noksha/nn/ops.hpp"
#include "noksha/serve/service.hpp"
#include "noksha/skeleton/skeleton.hpp"
#include "noksha/train/checkpoint.hpp"
#include "noksha/train/trainer.hpp"
#include "oracles.hpp"

namespace {

using namespace noksha;
namespace fs = std::filesystem;
namespace nt = noksha::testing;
using imaging::BinaryImage;
using imaging::StructuringElement;
using Inputs = std::vector<nn::Tensor64>;
using Clock = std::chrono::steady_clock;

// Each check returns "" on success or the first failure it saw; `detail` collects
// measured values for the report line.
struct Outcome {
  std::string failure;
  std::string detail;
};

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && out_.failure.empty()) out_.failure = what;
  }
  void note(const std::string& s) { out_.detail += (out_.detail.empty() ? "" : ", ") + s; }
  Outcome done() { return out_; }

 private:
  Outcome out_;
};

std::string fmt(double v, const char* spec = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

BinaryImage from_bits(unsigned bits, int w, int h) {
  BinaryImage img(w, h);
  for (int i = 0; i < w * h; ++i) img.set(i % w, i / w, (bits >> i) & 1U);
  return img;
}

Outcome morphology_suite() {
  Check c;
  const std::vector<StructuringElement> elements{StructuringElement::square(3), StructuringElement::cross(1),
                                                 StructuringElement(3, 2, {1, 0, 1, 0, 1, 1}, 1, 0)};
  auto one = [&](const BinaryImage& img, const std::string& tag) {
    for (std::size_t e = 0; e < elements.size(); ++e) {
      const auto& se = elements[e];
      const auto o = imaging::open(img, se);
      const auto cl = imaging::close(img, se);
      const std::string where = tag + " element " + std::to_string(e);
      c.expect(imaging::erode(img, se) == nt::brute_erode(img, se), "erode " + where);
      c.expect(imaging::dilate(img, se) == nt::brute_dilate(img, se), "dilate " + where);
      c.expect(o == nt::brute_open(img, se), "open " + where);
      c.expect(cl == nt::brute_close(img, se), "close " + where);
      c.expect(imaging::erode(img, se) == nt::brute_dual_erode(img, se), "duality " + where);
      c.expect(imaging::open(o, se) == o, "open idempotence " + where);
      c.expect(imaging::close(cl, se) == cl, "close idempotence " + where);
    }
  };
  for (unsigned bits = 0; bits < 512; ++bits) one(from_bits(bits, 3, 3), "3x3 #" + std::to_string(bits));
  std::mt19937 rng(2024);
  for (int i = 0; i < 100; ++i) one(nt::random_bitmap(8, 8, 0.5, rng), "8x8 #" + std::to_string(i));
  c.note("512 + 100 images, 3 elements");
  return c.done();
}

Outcome thinning_suite() {
  Check c;
  auto props = [&](const BinaryImage& img, const std::string& tag) {
    const auto out = skeleton::skeletonize(img);
    c.expect(out.converged, "converged " + tag);
    c.expect(out.image == nt::reference_thinning(img), "reference " + tag);
    c.expect(imaging::is_subset(out.image, img), "subset " + tag);
    c.expect(skeleton::skeletonize(out.image).image == out.image, "idempotence " + tag);
    c.expect(nt::flood_fill_count(out.image, 8) == nt::flood_fill_count(img, 8), "components " + tag);
  };
  const auto rect = nt::from_rows({".........", ".#######.", ".#######.", ".#######.", "........."});
  c.expect(nt::to_rows(skeleton::skeletonize(rect).image) ==
               ".........\n.........\n..####...\n.........\n.........\n",
           "frozen 3x7 rectangle");
  const std::vector<std::vector<std::string>> fixtures{
      {".........", ".#######.", ".#######.", ".#######.", "........."},
      {"....", ".##.", ".##.", "...."},
      {".....", "..#..", "....."},
      {"#####", "#####", "#####", "#####", "#####"},
      {"#......", ".#.....", "..#....", "...####"},
      {"..###..", ".#####.", "#######", ".#####.", "..###.."},
      {"###.###", "###.###", "#######", "###.###", "###.###"},
  };
  for (std::size_t i = 0; i < fixtures.size(); ++i) props(nt::from_rows(fixtures[i]), "fixture " + std::to_string(i));
  std::mt19937 rng(77);
  for (int i = 0; i < 200; ++i) {
    const auto img = i % 2 ? nt::random_bitmap(12, 12, 0.55, rng) : nt::random_blobs(12, 12, 3, rng);
    props(img, "random #" + std::to_string(i));
  }
  c.note(std::to_string(fixtures.size()) + " fixtures + 200 random 12x12");
  return c.done();
}

// Contracts an op output with fixed random weights so every output element matters.
nn::Tensor64 probe(const nn::Tensor64& out) {
  std::mt19937 rng(99);
  return nn::sum(nn::mul(out, nt::random_tensor(out.shape(), rng)));
}

nn::Tensor64 away_from_zero(nn::Shape shape, std::mt19937& rng) {
  auto t = nt::random_tensor(std::move(shape), rng, 0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  for (auto& v : t.mutable_data()) v = sign(rng) ? v : -v;
  return t;
}

Outcome gradient_suite() {
  using namespace noksha::nn;
  Check c;
  double worst = 0.0;
  auto grad = [&](const std::string& name, const std::function<Tensor64(const Inputs&)>& f, Inputs in) {
    const double err = nt::gradient_error(f, std::move(in), 1e-3);
    worst = std::max(worst, err);
    c.expect(err < 1e-3, name + " rel. error " + fmt(err));
  };
  std::mt19937 rng(31);
  for (auto [stride, pad, k] : {std::tuple{1, 0, 3}, {1, 1, 3}, {2, 1, 4}}) {
    const std::size_t side = stride == 2 ? 6 : 5, ks = static_cast<std::size_t>(k);
    grad("conv2d",
         [=](const Inputs& v) { return probe(conv2d(v[0], v[1], std::optional(v[2]), {stride, pad})); },
         {nt::random_tensor({2, 2, side, side}, rng), nt::random_tensor({3, 2, ks, ks}, rng), nt::random_tensor({3}, rng)});
  }
  for (auto [stride, pad] : {std::pair{1, 0}, {2, 1}}) {
    grad("conv_transpose2d",
         [=](const Inputs& v) { return probe(conv_transpose2d(v[0], v[1], std::optional(v[2]), {stride, pad})); },
         {nt::random_tensor({2, 3, 3, 3}, rng), nt::random_tensor({3, 2, 4, 4}, rng), nt::random_tensor({2}, rng)});
  }
  grad("instance_norm", [](const Inputs& v) { return probe(instance_norm(v[0], v[1], v[2], 1e-5)); },
       {nt::random_tensor({2, 3, 4, 4}, rng), nt::random_tensor({3}, rng, 0.5, 1.5), nt::random_tensor({3}, rng)});
  const Shape s{2, 2, 3, 3};
  grad("relu", [](const Inputs& v) { return probe(relu(v[0])); }, {away_from_zero(s, rng)});
  grad("leaky_relu", [](const Inputs& v) { return probe(leaky_relu(v[0], 0.2)); }, {away_from_zero(s, rng)});
  grad("tanh", [](const Inputs& v) { return probe(nn::tanh(v[0])); }, {nt::random_tensor(s, rng, -2, 2)});
  grad("sigmoid", [](const Inputs& v) { return probe(sigmoid(v[0])); }, {nt::random_tensor(s, rng, -3, 3)});
  grad("dropout",
       [](const Inputs& v) {
         CounterRng r(42);
         return probe(dropout(v[0], 0.5, r));
       },
       {nt::random_tensor(s, rng)});
  Inputs two{nt::random_tensor({2, 2, 3, 3}, rng), nt::random_tensor({2, 3, 3, 3}, rng)};
  grad("concat", [](const Inputs& v) { return probe(concat_channels(v[0], v[1])); }, two);
  grad("slice", [](const Inputs& v) { return probe(slice_channels(v[1], 1, 3)); }, two);
  Inputs same{nt::random_tensor({2, 3, 2, 2}, rng), nt::random_tensor({2, 3, 2, 2}, rng)};
  grad("add", [](const Inputs& v) { return probe(add(v[0], v[1])); }, same);
  grad("mul", [](const Inputs& v) { return probe(mul(v[0], v[1])); }, same);
  grad("scale", [](const Inputs& v) { return probe(scale(v[0], -1.7)); }, same);
  grad("mean", [](const Inputs& v) { return mean(mul(v[0], v[0])); }, same);
  auto a = nt::random_tensor({1, 3, 4, 4}, rng);
  auto b = a.clone();
  for (auto& v : b.mutable_data()) v += (rng() % 2 ? 0.3 : -0.3);
  grad("l1_loss", [](const Inputs& v) { return l1_loss(v[0], v[1]); }, {a, b});
  const auto labels = nt::random_tensor({1, 1, 3, 3}, rng, 0.0, 1.0);
  grad("bce_with_logits", [&](const Inputs& v) { return bce_with_logits(v[0], labels); },
       {nt::random_tensor({1, 1, 3, 3}, rng, -4, 4)});
  grad("bce_with_logits(const)", [](const Inputs& v) { return bce_with_logits(v[0], 1.0); },
       {nt::random_tensor({1, 1, 3, 3}, rng, -4, 4)});

  // <conv(x, W), y> == <x, conv_transpose(y, W)>.
  CounterRng crng(12);
  double adjoint = 0.0;
  for (auto [stride, pad] : {std::pair{1, 0}, {2, 1}, {1, 1}}) {
    const std::size_t k = stride == 2 ? 4 : 3;
    const auto x = Tensor::randn({2, 3, 8, 8}, crng);
    const auto w = Tensor::randn({4, 3, k, k}, crng);
    const auto cx = conv2d(x, w, std::optional<Tensor>{}, {stride, pad});
    const auto y = Tensor::randn(cx.shape(), crng);
    const auto ty = conv_transpose2d(y, w, std::optional<Tensor>{}, {stride, pad});
    double lhs = 0, rhs = 0, ref = 0;
    for (std::size_t i = 0; i < cx.numel(); ++i) {
      lhs += double(cx.data()[i]) * y.data()[i];
      ref += std::abs(double(cx.data()[i]) * y.data()[i]);
    }
    for (std::size_t i = 0; i < x.numel(); ++i) rhs += double(x.data()[i]) * ty.data()[i];
    adjoint = std::max(adjoint, std::abs(lhs - rhs) / ref);
  }
  c.expect(adjoint < 1e-4, "adjoint identity " + fmt(adjoint));
  c.note("max grad rel. error " + fmt(worst) + ", adjoint " + fmt(adjoint));
  return c.done();
}

Outcome loss_fixtures() {
  Check c;
  const nn::Tensor zeros({1, 1, 30, 30});
  const double d = model::discriminator_loss(zeros, zeros).item();
  c.expect(std::abs(d - 2.0 * std::log(2.0)) <= 1e-6, "discriminator_loss(0, 0) = " + fmt(d, "%.9f"));
  const double bce = nn::bce_with_logits(nn::Tensor({1, 1, 4, 4}), 1.0F).item();
  c.expect(std::abs(bce - std::log(2.0)) <= 1e-6, "bce(0, 1) = " + fmt(bce, "%.9f"));
  nn::CounterRng rng(4);
  const auto logits = nn::Tensor::randn({1, 1, 6, 6}, rng);
  const auto fake = nn::Tensor::uniform({1, 3, 8, 8}, rng, -1.0F, 1.0F);
  const auto target = nn::Tensor::uniform({1, 3, 8, 8}, rng, -1.0F, 1.0F);
  for (double lambda : {0.0, 1.0, 100.0, 250.0}) {
    const auto g = model::generator_loss(logits, fake, target, {lambda});
    c.expect(g.total.item() == g.adversarial + static_cast<float>(lambda) * g.l1,
             "total != adv + lambda * l1 at lambda " + fmt(lambda));
  }
  c.note("d_loss(0) - 2 ln 2 = " + fmt(d - 2.0 * std::log(2.0)));
  return c.done();
}

Outcome shape_fixtures() {
  Check c;
  model::GeneratorConfig gc;
  gc.image_size = 256;
  gc.depth = 8;
  const model::Generator g(gc, 1);
  nn::NoGradGuard ng;
  nn::CounterRng rng(0);
  std::vector<nn::Shape> enc;
  const auto out = g.forward(nn::Tensor({1, 3, 256, 256}), model::Mode::kInfer, rng, &enc);
  c.expect(out.shape() == nn::Shape({1, 3, 256, 256}), "generator output " + nn::shape_string(out.shape()));
  c.expect(enc.size() == 8 && enc.back()[2] == 1 && enc.back()[3] == 1,
           "bottleneck " + (enc.empty() ? std::string("missing") : nn::shape_string(enc.back())));
  const model::DiscriminatorConfig dc;
  const model::Discriminator d(dc, 1);
  const auto patches = d.forward(nn::Tensor({1, 3, 256, 256}), nn::Tensor({1, 3, 256, 256}));
  c.expect(patches.shape() == nn::Shape({1, 1, 30, 30}), "discriminator grid " + nn::shape_string(patches.shape()));
  c.expect(model::Discriminator::output_side(dc, 256) == 30, "shape arithmetic");
  c.note("bottleneck " + (enc.empty() ? std::string("?") : nn::shape_string(enc.back())) + ", patches " +
         nn::shape_string(patches.shape()));
  return c.done();
}

Outcome overfit_smoke(const fs::path& work) {
  Check c;
  const auto manifest = nt::write_pair_dataset(work / "data", 4, 4, 40);
  constexpr int kEpochs = 300;  // one step per pair per epoch
  auto cfg = train::TrainConfig::tiny();
  cfg.manifest_path = manifest;
  cfg.epochs = kEpochs;
  cfg.checkpoint_every = kEpochs;
  cfg.seed = 7;
  c.expect(cfg.lambda_l1 == 100.0 && cfg.generator.image_size == 64 && cfg.generator.depth == 6, "tiny config");

  std::vector<std::string> logs;
  double mean_l1 = 0.0;
  for (int run = 0; run < 2; ++run) {
    cfg.output_dir = work / ("run" + std::to_string(run));
    const auto result = train::train(cfg);
    logs.push_back(slurp(result.log_path));
    train::EvalOptions opt;
    opt.split = dataset::Split::kTrain;
    const auto eval = train::evaluate(result.checkpoints.back(), manifest, opt);
    if (run == 0) mean_l1 = eval.mean_l1;
    else c.expect(eval.mean_l1 == mean_l1, "evaluation differs between reruns");
  }
  c.expect(mean_l1 < 0.1, "train mean L1 " + fmt(mean_l1));
  c.expect(logs[0] == logs[1], "loss log differs between reruns");
  c.note("train mean L1 " + fmt(mean_l1) + " after " + std::to_string(kEpochs) + " steps per pair");
  return c.done();
}

int run_cli(const std::string& cli, const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + cli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  return std::system(cmd.c_str());
}

Outcome pipeline(const fs::path& work, const std::string& cli) {
  Check c;
  const auto src = work / "crops";
  fs::create_directories(src);
  for (int i = 0; i < 20; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "m%02d.png", i);
    imaging::write_png(src / name, nt::synthetic_motif(260 + 7 * i, static_cast<std::uint32_t>(i)));
  }

  auto pair_sizes_ok = [&](const dataset::DatasetManifest& m, const fs::path& dir) {
    for (const auto& e : m.entries) {
      const auto img = imaging::read_png(dir / e.path);
      if (img.width() != 512 || img.height() != 256) return false;
    }
    return true;
  };

  dataset::DatasetManifest built, split, augmented;
  const fs::path plain = work / "plain", aug = work / "aug";
  if (!cli.empty()) {
    c.expect(run_cli(cli, "dataset build --variant skeleton --src \"" + src.string() + "\" --out \"" + plain.string() + "\"",
                     work / "build.log") == 0,
             "dataset build exited nonzero");
    built = dataset::read_manifest(plain / "manifest.json");
    c.expect(run_cli(cli, "dataset split --manifest \"" + (plain / "manifest.json").string() + "\" --ratio 0.9 --out \"" +
                              (plain / "split.json").string() + "\"",
                     work / "split.log") == 0,
             "dataset split exited nonzero");
    split = dataset::read_manifest(plain / "split.json");
    c.expect(run_cli(cli, "dataset build --variant skeleton --augment flip-h,flip-v,rot90 --src \"" + src.string() +
                              "\" --out \"" + aug.string() + "\"",
                     work / "aug.log") == 0,
             "augmented build exited nonzero");
    augmented = dataset::read_manifest(aug / "manifest.json");
  } else {
    dataset::BuildConfig cfg;
    cfg.source_dir = src;
    cfg.out_dir = plain;
    built = dataset::build_variant(cfg).manifest;
    split = dataset::split_dataset(built, 0.9, 0);
    cfg.out_dir = aug;
    cfg.augmentation = dataset::AugmentationPolicy::parse("flip-h,flip-v,rot90");
    augmented = dataset::build_variant(cfg).manifest;
  }
  const auto counts = split.counts();
  const auto aug_counts = augmented.counts();
  c.expect(built.entries.size() == 20, "built " + std::to_string(built.entries.size()) + " pairs");
  c.expect(pair_sizes_ok(built, plain), "pair image not 512x256");
  c.expect(counts.train == 18 && counts.test == 2,
           "split " + std::to_string(counts.train) + "/" + std::to_string(counts.test));
  c.expect(aug_counts.total == 4 * built.entries.size(), "augmented total " + std::to_string(aug_counts.total));
  c.expect(pair_sizes_ok(augmented, aug), "augmented pair image not 512x256");
  c.note(std::to_string(built.entries.size()) + " pairs, split " + std::to_string(counts.train) + "/" +
         std::to_string(counts.test) + ", augmented " + std::to_string(aug_counts.total) +
         (cli.empty() ? " (library)" : " (cli)"));
  return c.done();
}

Outcome persistence(const fs::path& work) {
  Check c;
  const auto manifest = nt::write_pair_dataset(work / "data", 4, 4, 60);
  auto cfg = train::TrainConfig::tiny();
  cfg.manifest_path = manifest;
  cfg.checkpoint_every = 1;
  cfg.seed = 11;
  cfg.epochs = 3;
  cfg.output_dir = work / "whole";
  const auto whole = train::train(cfg);

  cfg.output_dir = work / "interrupted";
  cfg.epochs = 2;
  train::train(cfg);
  cfg.epochs = 3;
  const auto resumed = train::train(cfg, work / "interrupted" / "checkpoints" / "epoch_0001.ckpt");

  const auto a = slurp(whole.log_path), b = slurp(resumed.log_path);
  c.expect(!a.empty() && a == b, "resumed loss log differs from the uninterrupted one");
  const auto ca = train::load_checkpoint(whole.checkpoints.back());
  const auto cb = train::load_checkpoint(resumed.checkpoints.back());
  c.expect(model::parameter_checksum(ca.generator) == model::parameter_checksum(cb.generator),
           "generator weights differ after resume");

  const auto log = train::read_loss_log(whole.log_path);
  c.expect(log.size() == 12, "log has " + std::to_string(log.size()) + " records");
  std::istringstream lines(a);
  std::string line;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    c.expect(j.contains("d_loss") && j.contains("g_loss_total") && j.contains("l1"), "log line lacks the loss triple");
  }
  const std::regex triple(R"(start d_loss -?\d+\.\d{4} g_loss -?\d+\.\d{4} l1 -?\d+\.\d{4} \| )"
                          R"(end d_loss -?\d+\.\d{4} g_loss -?\d+\.\d{4} l1 -?\d+\.\d{4})");
  c.expect(std::regex_match(whole.summary, triple), "summary '" + whole.summary + "'");
  c.expect(whole.summary == resumed.summary, "summary differs after resume");
  c.note(whole.summary);
  return c.done();
}

Outcome service_contract(const fs::path& work) {
  Check c;
  auto cfg = train::TrainConfig::tiny();
  cfg.generator.base_filters = 4;
  cfg.discriminator.base_filters = 4;
  train::save_checkpoint(work / "skeleton.ckpt", train::TrainingSession::create(cfg).checkpoint());
  const auto registry = serve::ModelRegistry::load_all({{"skeleton", work / "skeleton.ckpt"}});
  const auto before = model::parameter_checksum(registry.find("skeleton")->generator.parameters());

  serve::HttpServer server(registry);
  const int port = server.bind("127.0.0.1", 0);
  server.start();

  nlohmann::json req;
  req["model"] = "skeleton";
  req["image"] = serve::base64_encode(imaging::encode_png(nt::synthetic_motif(256, 3)));
  req["seed"] = 2024;
  const std::string body = req.dump();

  auto post = [&](const std::string& b) -> std::pair<int, std::string> {
    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(300, 0);
    const auto res = cli.Post("/api/generate", b, "application/json");
    return res ? std::pair{res->status, res->body} : std::pair{-1, std::string()};
  };

  const auto first = post(body), second = post(body);
  c.expect(first.first == 200, "status " + std::to_string(first.first));
  c.expect(first.second == second.second, "seeded request is not byte-deterministic");

  std::vector<std::pair<int, std::string>> replies(8);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&, i] { replies[i] = post(body); });
  for (auto& t : threads) t.join();
  for (const auto& r : replies) c.expect(r.first == 200 && r.second == first.second, "concurrent reply differs");

  req["model"] = "nope";
  const auto missing = post(req.dump());
  c.expect(missing.first == 404, "unknown model status " + std::to_string(missing.first));
  try {
    c.expect(nlohmann::json::parse(missing.second).at("available") == nlohmann::json::array({"skeleton"}),
             "404 body does not list available models");
  } catch (const nlohmann::json::exception&) {
    c.expect(false, "404 body is not JSON");
  }
  server.stop();
  c.expect(model::parameter_checksum(registry.find("skeleton")->generator.parameters()) == before,
           "weights changed while serving");
  c.note("10 seeded requests identical, 404 lists models");
  return c.done();
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli, only;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") cli = argv[i + 1];
    else if (flag == "--only") only = argv[i + 1];
  }
  nt::TempDir work("acceptance");

  struct Criterion {
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"morphology-oracles", 10, morphology_suite},
      {"thinning-oracle", 30, thinning_suite},
      {"gradient-suite", 120, gradient_suite},
      {"loss-fixtures", 60, loss_fixtures},
      {"shape-fixtures", 60, shape_fixtures},
      {"overfit-smoke", 600, [&] { return overfit_smoke(work / "overfit"); }},
      {"pipeline-end-to-end", 60, [&] { return pipeline(work / "pipeline", cli); }},
      {"determinism-persistence", 120, [&] { return persistence(work / "persist"); }},
      {"service-contract", 120, [&] { return service_contract(work / "serve"); }},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    if (!only.empty() && cr.name.find(only) == std::string::npos) continue;
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = cr.run();
    } catch (const std::exception& e) {
      out.failure = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (out.failure.empty() && secs > cr.budget_s) out.failure = "took " + fmt(secs) + " s, budget " + fmt(cr.budget_s) + " s";
    const bool pass = out.failure.empty();
    failed += pass ? 0 : 1;
    std::cout << (pass ? "PASS " : "FAIL ") << cr.name << " [" << fmt(secs, "%.1f") << " s] "
              << (pass ? out.detail : out.failure) << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
