#include <csignal>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "noksha/dataset/builder.hpp"
#include "noksha/dataset/fetch.hpp"
#include "noksha/dataset/manifest.hpp"
#include "noksha/error.hpp"
#include "noksha/serve/service.hpp"
#include "noksha/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace noksha;

namespace {

serve::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

std::pair<std::string, int> parse_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw ConfigError("--bind expects HOST:PORT, got '" + bind + "'");
  try {
    return {bind.substr(0, colon), std::stoi(bind.substr(colon + 1))};
  } catch (const std::exception&) {
    throw ConfigError("bad port in '" + bind + "'");
  }
}

void print_counts(const dataset::DatasetManifest& m) {
  const auto c = m.counts();
  std::cout << "pairs: " << c.total << " (train " << c.train << ", test " << c.test << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jamdani motif dataset, training and generation toolkit"};
  app.require_subcommand(1);

  // dataset
  auto* ds = app.add_subcommand("dataset", "Fetch, build and split datasets");
  ds->require_subcommand(1);

  std::string fetch_url, fetch_hash;
  fs::path fetch_dest;
  auto* fetch = ds->add_subcommand("fetch", "Download and extract a dataset archive");
  fetch->add_option("--url", fetch_url, "file://, http:// or https:// archive URL")->required();
  fetch->add_option("--dest", fetch_dest, "Extraction directory")->required();
  fetch->add_option("--expect-hash", fetch_hash, "Pinned SHA-256 of the archive");

  std::string build_variant_name, build_augment;
  fs::path build_src, build_out, build_sketch_dir;
  std::uint64_t build_seed = 0;
  double build_ratio = 0.9;
  auto* build = ds->add_subcommand("build", "Build pair images and a manifest for one variant");
  build->add_option("--variant", build_variant_name, "skeleton|reduced|sketch|boundary|enhanced")
      ->required()
      ->check(CLI::IsMember({"skeleton", "reduced", "sketch", "boundary", "enhanced"}));
  build->add_option("--src", build_src, "Directory of motif crops (PNG)")->required();
  build->add_option("--out", build_out, "Output directory")->required();
  build->add_option("--augment", build_augment, "Comma list of flip-h,flip-v,rot90,rot180,rot270");
  build->add_option("--seed", build_seed, "Split seed");
  build->add_option("--ratio", build_ratio, "Train fraction")->capture_default_str();
  build->add_option("--sketch-dir", build_sketch_dir, "Hand drawings for the sketch variant");

  fs::path split_manifest, split_out;
  double split_ratio = 0.9;
  std::uint64_t split_seed = 0;
  auto* split = ds->add_subcommand("split", "Re-split a manifest into train and test");
  split->add_option("--manifest", split_manifest, "Manifest to split")->required();
  split->add_option("--ratio", split_ratio, "Train fraction")->capture_default_str();
  split->add_option("--seed", split_seed, "Shuffle seed");
  split->add_option("--out", split_out, "Output manifest (default: overwrite)");

  // train
  train::TrainConfig tc;
  std::optional<fs::path> resume;
  bool tiny = false;
  std::optional<int> image_size, depth, base_filters, disc_layers, disc_filters;
  std::optional<double> lr;
  auto* tr = app.add_subcommand("train", "Train a generator/discriminator pair");
  tr->add_option("--manifest", tc.manifest_path, "Dataset manifest")->required();
  tr->add_option("--out", tc.output_dir, "Output directory")->required();
  tr->add_option("--epochs", tc.epochs)->capture_default_str();
  tr->add_option("--batch", tc.batch_size)->capture_default_str();
  tr->add_option("--lambda", tc.lambda_l1, "Weight of the L1 term")->capture_default_str();
  tr->add_option("--seed", tc.seed);
  tr->add_option("--checkpoint-every", tc.checkpoint_every, "Epochs between checkpoints")->capture_default_str();
  tr->add_option("--resume", resume, "Checkpoint to continue from");
  tr->add_flag("--tiny", tiny, "64x64, depth 6, narrow filters");
  tr->add_option("--image-size", image_size);
  tr->add_option("--depth", depth);
  tr->add_option("--base-filters", base_filters);
  tr->add_option("--disc-layers", disc_layers);
  tr->add_option("--disc-filters", disc_filters);
  tr->add_option("--lr", lr, "Learning rate for both networks");
  tr->add_flag("--wall-time", tc.record_wall_time, "Record elapsed seconds in the loss log");

  fs::path eval_ckpt, eval_manifest, eval_out;
  std::string eval_split = "test";
  std::uint64_t eval_seed = 0;
  auto* ev = app.add_subcommand("evaluate", "Mean L1 and triptychs on a split");
  ev->add_option("--ckpt", eval_ckpt)->required();
  ev->add_option("--manifest", eval_manifest)->required();
  ev->add_option("--out", eval_out)->required();
  ev->add_option("--split", eval_split)->check(CLI::IsMember({"train", "test"}))->capture_default_str();
  ev->add_option("--seed", eval_seed);

  std::string bind = "127.0.0.1:8080";
  std::vector<std::string> model_specs;
  auto* sv = app.add_subcommand("serve", "HTTP generation service");
  sv->add_option("--bind", bind, "HOST:PORT")->capture_default_str();
  sv->add_option("--model", model_specs, "name=checkpoint, repeatable")->required();

  fs::path infer_ckpt, infer_in, infer_out;
  std::optional<fs::path> infer_targets;
  std::uint64_t infer_seed = 0;
  auto* inf = app.add_subcommand("infer", "Generate motifs for a directory of strokes");
  inf->add_option("--ckpt", infer_ckpt)->required();
  inf->add_option("--in", infer_in)->required();
  inf->add_option("--out", infer_out)->required();
  inf->add_option("--seed", infer_seed);
  inf->add_option("--targets", infer_targets, "Ground-truth directory for triptychs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fetch) {
      dataset::FetchOptions opt;
      if (!fetch_hash.empty()) opt.expected_hash = fetch_hash;
      const auto r = dataset::fetch_dataset(fetch_url, fetch_dest, opt);
      std::cout << (r.cache_hit ? "cached " : "fetched ") << r.files.size() << " files into " << r.root.string()
                << "\nsha256 " << r.content_hash << "\n";
    } else if (*build) {
      dataset::BuildConfig cfg;
      cfg.variant = dataset::variant_from_string(build_variant_name);
      cfg.source_dir = build_src;
      cfg.out_dir = build_out;
      cfg.augmentation = dataset::AugmentationPolicy::parse(build_augment);
      cfg.seed = build_seed;
      cfg.split_ratio = build_ratio;
      if (!build_sketch_dir.empty()) cfg.sketch_dir = build_sketch_dir;
      const auto report = dataset::build_variant(cfg);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto& e : report.errors) std::cerr << "skipped: " << e << "\n";
      std::cout << "variant " << report.manifest.variant << ": " << report.sources_seen << " sources";
      if (report.filtered) std::cout << ", " << report.filtered << " below the resolution filter";
      std::cout << "\n";
      print_counts(report.manifest);
      std::cout << "published dataset size for this variant: " << report.reference_size << "\n"
                << "manifest " << report.manifest_path.string() << "\n";
    } else if (*split) {
      const auto m = dataset::split_dataset(dataset::read_manifest(split_manifest), split_ratio, split_seed);
      const fs::path out = split_out.empty() ? split_manifest : split_out;
      dataset::write_manifest(out, m);
      print_counts(m);
    } else if (*tr) {
      if (tiny) {
        const auto t = train::TrainConfig::tiny();
        tc.generator = t.generator;
        tc.discriminator = t.discriminator;
      }
      if (image_size) tc.generator.image_size = *image_size;
      if (depth) tc.generator.depth = *depth;
      if (base_filters) tc.generator.base_filters = *base_filters;
      if (disc_layers) tc.discriminator.layers = *disc_layers;
      if (disc_filters) tc.discriminator.base_filters = *disc_filters;
      if (lr) tc.generator_adam.learning_rate = tc.discriminator_adam.learning_rate = *lr;
      const auto result = train::train(tc, resume, [](const train::LossRecord& r) {
        std::cout << "epoch " << r.epoch << " step " << r.step << " d_loss " << r.d_loss << " g_loss "
                  << r.g_loss_total << " l1 " << r.l1 << "\n";
      });
      std::cout << result.summary << "\n";
      if (!result.checkpoints.empty()) std::cout << "checkpoint " << result.checkpoints.back().string() << "\n";
    } else if (*ev) {
      train::EvalOptions opt;
      opt.split = dataset::split_from_string(eval_split);
      opt.seed = eval_seed;
      opt.out_dir = eval_out;
      const auto r = train::evaluate(eval_ckpt, eval_manifest, opt);
      std::cout << "mean l1 " << r.mean_l1 << " over " << r.pairs.size() << " pairs\n";
    } else if (*sv) {
      std::vector<std::pair<std::string, fs::path>> specs;
      for (const auto& s : model_specs) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--model expects name=path, got '" + s + "'");
        specs.emplace_back(s.substr(0, eq), s.substr(eq + 1));
      }
      std::vector<std::string> problems;
      const auto registry = serve::ModelRegistry::load_all(specs, &problems);
      for (const auto& p : problems) std::cerr << "warning: " << p << "\n";
      const auto [host, port] = parse_bind(bind);
      serve::HttpServer server(registry);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "serving " << registry.names().size() << " model(s) on " << host << ":" << bound << std::endl;
      server.listen();
      g_server = nullptr;
    } else if (*inf) {
      const auto report = serve::infer_batch(infer_ckpt, infer_in, infer_out, infer_seed, infer_targets);
      for (const auto& i : report.items) {
        if (!i.ok) std::cerr << "failed: " << i.input << ": " << i.message << "\n";
      }
      std::cout << report.succeeded() << " of " << report.items.size() << " inputs generated\n";
      if (report.succeeded() != report.items.size()) return 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
