#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "noksha/model/pix2pix.hpp"
#include "noksha/train/config.hpp"

namespace noksha::serve {

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Accepts an optional "data:...;base64," prefix. Throws DecodeError on bad input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

struct LoadedModel {
  std::string name;
  std::filesystem::path checkpoint;
  train::TrainConfig config;
  model::Generator generator;
};

/// Named generators, immutable once loaded; safe to share across request threads.
class ModelRegistry {
 public:
  /// Loads a checkpoint and runs the self-test (forward on a zero image).
  void load(const std::string& name, const std::filesystem::path& checkpoint);
  /// Registers an in-memory generator; the self-test still applies.
  void add(std::string name, model::Generator generator, std::filesystem::path label = {},
           train::TrainConfig config = {});

  /// Loads every (name, path); failures become diagnostics. Throws ConfigError listing
  /// them all when nothing loads.
  static ModelRegistry load_all(const std::vector<std::pair<std::string, std::filesystem::path>>& specs,
                                std::vector<std::string>* diagnostics = nullptr);

  const LoadedModel* find(std::string_view name) const;
  std::vector<std::string> names() const;
  const std::map<std::string, LoadedModel, std::less<>>& models() const noexcept { return models_; }
  bool empty() const noexcept { return models_.empty(); }

 private:
  std::map<std::string, LoadedModel, std::less<>> models_;
};

struct GenerateRequest {
  std::string model;
  std::vector<std::uint8_t> image_png;
  std::optional<std::uint64_t> seed;
  /// Set for light-on-dark canvases.
  bool invert = false;
};

struct GenerateResult {
  /// 256x256 RGB PNG.
  std::vector<std::uint8_t> png;
  std::uint64_t seed = 0;
  bool resized = false;
};

/// Unknown model is NotFoundError (its message lists the available names); an image that
/// does not decode is DecodeError or UnsupportedFormatError. Without a seed a fresh one
/// below 2^31 is drawn.
GenerateResult generate(const ModelRegistry& registry, const GenerateRequest& request);

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Routing without the network: GET /health, GET /api/models, POST /api/generate.
HttpResponse handle_request(const ModelRegistry& registry, std::string_view method, std::string_view path,
                            std::string_view body);

/// HTTP front end over handle_request, with permissive CORS headers.
class HttpServer {
 public:
  explicit HttpServer(const ModelRegistry& registry);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port; throws IoError on failure.
  int bind(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  void listen();
  /// Serves on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct BatchItem {
  std::string input;
  std::string output;
  std::string triptych;
  bool ok = false;
  std::string message;
};

struct BatchReport {
  std::vector<BatchItem> items;
  std::size_t succeeded() const;
};

/// One <stem>_gen.png per input PNG (sorted by name), plus <stem>_triptych.png when
/// `targets_dir` holds a file of the same name. Writes report.json to `output_dir`.
BatchReport infer_batch(const std::filesystem::path& checkpoint, const std::filesystem::path& input_dir,
                        const std::filesystem::path& output_dir, std::uint64_t seed,
                        const std::optional<std::filesystem::path>& targets_dir = std::nullopt);

}  // namespace noksha::serve
