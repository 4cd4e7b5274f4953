#include "noksha/serve/service.hpp"

#include <algorithm>
#include <random>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "noksha/dataset/pair.hpp"
#include "noksha/error.hpp"
#include "noksha/imaging/ops.hpp"
#include "noksha/imaging/png.hpp"
#include "noksha/nn/ops.hpp"
#include "noksha/train/checkpoint.hpp"
#include "noksha/train/data.hpp"

namespace noksha::serve {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.rfind("data:", 0) == 0) {
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) throw DecodeError("data URL without payload", 0);
    text.remove_prefix(comma + 1);
  }
  std::string clean;
  clean.reserve(text.size());
  for (const char c : text)
    if (c != '\n' && c != '\r' && c != ' ' && c != '\t') clean.push_back(c);
  if (clean.size() % 4 != 0) throw DecodeError("base64 length is not a multiple of 4", clean.size());
  std::vector<std::uint8_t> out(clean.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                                static_cast<int>(clean.size()));
  if (n < 0) throw DecodeError("invalid base64", 0);
  std::size_t pad = 0;
  if (!clean.empty() && clean.back() == '=') pad = clean[clean.size() - 2] == '=' ? 2 : 1;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

namespace {

void self_test(const std::string& name, const model::Generator& gen) {
  const auto side = static_cast<std::size_t>(gen.config().image_size);
  const auto c = static_cast<std::size_t>(gen.config().in_channels);
  nn::NoGradGuard no_grad;
  nn::CounterRng rng(0);
  const nn::Tensor out = gen.forward(nn::Tensor({1, c, side, side}, 0.0F), model::Mode::kInfer, rng);
  for (const float v : out.data()) {
    if (!std::isfinite(v)) throw NumericError(name, "model '" + name + "' produced non-finite output in self-test");
  }
}

std::string error_json(const std::string& message) {
  ojson j;
  j["error"] = message;
  return j.dump();
}

imaging::RasterImage invert(imaging::RasterImage img) {
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(255 - v);
  return img;
}

}  // namespace

void ModelRegistry::load(const std::string& name, const fs::path& checkpoint) {
  const auto ckpt = train::load_checkpoint(checkpoint);
  add(name, train::restore_generator(ckpt), checkpoint, ckpt.config);
}

void ModelRegistry::add(std::string name, model::Generator generator, fs::path label, train::TrainConfig config) {
  if (name.empty()) throw ConfigError("model name must not be empty");
  if (models_.contains(name)) throw ConfigError("model '" + name + "' is registered twice");
  if (generator.config().in_channels != 3 || generator.config().out_channels != 3) {
    throw ConfigError("model '" + name + "' must map RGB to RGB");
  }
  self_test(name, generator);
  config.generator = generator.config();
  LoadedModel m{name, std::move(label), std::move(config), std::move(generator)};
  models_.emplace(std::move(name), std::move(m));
}

ModelRegistry ModelRegistry::load_all(const std::vector<std::pair<std::string, fs::path>>& specs,
                                      std::vector<std::string>* diagnostics) {
  ModelRegistry reg;
  std::vector<std::string> problems;
  for (const auto& [name, path] : specs) {
    try {
      reg.load(name, path);
    } catch (const Error& e) {
      problems.push_back(name + "=" + path.string() + ": " + e.what());
    }
  }
  if (diagnostics) *diagnostics = problems;
  if (reg.empty()) {
    std::string msg = "no model could be loaded";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  return reg;
}

const LoadedModel* ModelRegistry::find(std::string_view name) const {
  const auto it = models_.find(name);
  return it == models_.end() ? nullptr : &it->second;
}

std::vector<std::string> ModelRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : models_) out.push_back(name);
  return out;
}

GenerateResult generate(const ModelRegistry& registry, const GenerateRequest& request) {
  const LoadedModel* m = registry.find(request.model);
  if (m == nullptr) {
    std::string list;
    for (const auto& n : registry.names()) list += (list.empty() ? "" : ", ") + n;
    throw NotFoundError("unknown model '" + request.model + "'; available: " + list);
  }
  imaging::RasterImage img = imaging::to_rgb(imaging::decode_png(request.image_png));
  if (request.invert) img = invert(std::move(img));

  GenerateResult result;
  result.resized = img.width() != dataset::kPairSide || img.height() != dataset::kPairSide;
  if (result.resized) img = imaging::resize(img, dataset::kPairSide, dataset::kPairSide, imaging::ResizeMode::kBilinear);
  if (request.seed) {
    result.seed = *request.seed;
  } else {
    std::random_device rd;
    result.seed = std::uniform_int_distribution<std::uint64_t>(0, (1ULL << 31) - 1)(rd);
  }

  const int side = m->generator.config().image_size;
  nn::NoGradGuard no_grad;
  nn::CounterRng rng(result.seed);
  const nn::Tensor out = m->generator.forward(train::image_to_tensor(img, side), model::Mode::kInfer, rng);
  imaging::RasterImage motif = train::tensor_to_image(out);
  if (side != dataset::kPairSide) {
    motif = imaging::resize(motif, dataset::kPairSide, dataset::kPairSide, imaging::ResizeMode::kBilinear);
  }
  result.png = imaging::encode_png(motif);
  return result;
}

HttpResponse handle_request(const ModelRegistry& registry, std::string_view method, std::string_view path,
                            std::string_view body) {
  if (method == "GET" && path == "/health") return {200, R"({"status":"ok"})"};
  if (method == "GET" && path == "/api/models") {
    ojson models = ojson::array();
    for (const auto& [name, m] : registry.models()) {
      models.push_back({{"name", name}, {"checkpoint", m.checkpoint.generic_string()}});
    }
    ojson doc;
    doc["models"] = std::move(models);
    return {200, doc.dump()};
  }
  if (path == "/api/generate") {
    if (method != "POST") return {405, error_json("use POST for /api/generate")};
    GenerateRequest req;
    try {
      const auto j = nlohmann::json::parse(body);
      req.model = j.at("model").get<std::string>();
      req.image_png = base64_decode(j.at("image").get<std::string>());
      if (j.contains("seed") && !j.at("seed").is_null()) {
        const auto& s = j.at("seed");
        if (!s.is_number_unsigned()) {
          return {400, error_json("seed must be a non-negative integer")};
        }
        req.seed = s.get<std::uint64_t>();
      }
      req.invert = j.value("invert", false);
    } catch (const nlohmann::json::exception& e) {
      return {400, error_json(std::string("malformed request: ") + e.what())};
    } catch (const DecodeError& e) {
      return {400, error_json(std::string("image is not valid base64: ") + e.what())};
    }
    try {
      const auto result = generate(registry, req);
      ojson doc;
      doc["image"] = base64_encode(result.png);
      doc["seed"] = result.seed;
      doc["resized"] = result.resized;
      return {200, doc.dump()};
    } catch (const NotFoundError& e) {
      ojson doc;
      doc["error"] = e.what();
      doc["available"] = registry.names();
      return {404, doc.dump()};
    } catch (const DecodeError& e) {
      return {400, error_json(std::string("bad image: ") + e.what())};
    } catch (const UnsupportedFormatError& e) {
      return {400, error_json(std::string("bad image: ") + e.what())};
    }
  }
  ojson doc;
  doc["error"] = "no route for " + std::string(method) + " " + std::string(path);
  doc["available"] = registry.names();
  return {404, doc.dump()};
}

struct HttpServer::Impl {
  explicit Impl(const ModelRegistry& r) : registry(r) {}
  const ModelRegistry& registry;
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(const ModelRegistry& registry) : impl_(std::make_unique<Impl>(registry)) {
  auto& srv = impl_->server;
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  const ModelRegistry* reg = &impl_->registry;
  auto dispatch = [reg](const httplib::Request& req, httplib::Response& res) {
    HttpResponse r;
    try {
      r = handle_request(*reg, req.method, req.path, req.body);
    } catch (const std::exception& e) {
      r = {500, error_json(e.what())};
    }
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  srv.Get(".*", dispatch);
  srv.Post(".*", dispatch);
  srv.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->server.bind_to_any_port(host);
    if (p <= 0) throw IoError("cannot bind to " + host);
    return p;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("cannot bind to " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::size_t BatchReport::succeeded() const {
  return static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [](const BatchItem& i) { return i.ok; }));
}

BatchReport infer_batch(const fs::path& checkpoint, const fs::path& input_dir, const fs::path& output_dir,
                        std::uint64_t seed, const std::optional<fs::path>& targets_dir) {
  if (!fs::is_directory(input_dir)) throw NotFoundError("input directory " + input_dir.string() + " does not exist");
  ModelRegistry reg;
  reg.load("model", checkpoint);
  fs::create_directories(output_dir);

  std::vector<fs::path> inputs;
  for (const auto& e : fs::directory_iterator(input_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") inputs.push_back(e.path());
  }
  std::sort(inputs.begin(), inputs.end());

  BatchReport report;
  for (const auto& in : inputs) {
    BatchItem item;
    item.input = in.filename().string();
    const std::string stem = in.stem().string();
    try {
      const auto bytes = imaging::read_file(in);
      const auto result = generate(reg, {"model", bytes, seed, false});
      item.output = stem + "_gen.png";
      imaging::write_file(output_dir / item.output, result.png);
      if (targets_dir && fs::exists(*targets_dir / in.filename())) {
        const imaging::RasterImage cond = imaging::resize(imaging::to_rgb(imaging::decode_png(bytes)), 256, 256);
        const imaging::RasterImage target = imaging::resize(imaging::to_rgb(imaging::read_png(*targets_dir / in.filename())), 256, 256);
        imaging::RasterImage tri(768, 256, 3);
        imaging::paste(tri, cond, 0, 0);
        imaging::paste(tri, imaging::decode_png(result.png), 256, 0);
        imaging::paste(tri, target, 512, 0);
        item.triptych = stem + "_triptych.png";
        imaging::write_png(output_dir / item.triptych, tri);
      }
      item.ok = true;
    } catch (const Error& e) {
      item.message = e.what();
    }
    report.items.push_back(std::move(item));
  }

  ojson doc;
  doc["checkpoint"] = checkpoint.generic_string();
  doc["seed"] = seed;
  ojson items = ojson::array();
  for (const auto& i : report.items) {
    items.push_back({{"input", i.input},
                     {"output", i.output},
                     {"triptych", i.triptych.empty() ? ojson(nullptr) : ojson(i.triptych)},
                     {"ok", i.ok},
                     {"message", i.message}});
  }
  doc["items"] = std::move(items);
  const std::string text = doc.dump(2) + "\n";
  imaging::write_file(output_dir / "report.json", {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  return report;
}

}  // namespace noksha::serve
