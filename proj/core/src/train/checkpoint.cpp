#include "noksha/train/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <map>

#include <nlohmann/json.hpp>

#include "noksha/error.hpp"
#include "noksha/imaging/png.hpp"

namespace noksha::train {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::uint8_t, 8> kMagic{'N', 'O', 'K', 'S', 'H', 'A', '1', '\0'};
constexpr const char* kMetaName = "meta.json";

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void raw(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (n > b_.size() - pos_) {
      throw IntegrityError("checkpoint truncated at byte " + std::to_string(pos_));
    }
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

std::size_t element_count(const std::vector<std::uint32_t>& dims) {
  std::size_t n = 1;
  for (const auto d : dims) n *= d;
  return n;
}

TensorRecord float_record(std::string name, const nn::Shape& shape, std::span<const float> values) {
  TensorRecord r;
  r.name = std::move(name);
  for (const auto d : shape) r.dims.push_back(static_cast<std::uint32_t>(d));
  r.values.assign(values.begin(), values.end());
  return r;
}

nn::Shape to_shape(const std::vector<std::uint32_t>& dims) { return {dims.begin(), dims.end()}; }

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::uint8_t> encode_records(const std::vector<TensorRecord>& records) {
  Writer w;
  w.raw(kMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(records.size()));
  for (const auto& r : records) {
    if (r.name.size() > 0xFFFF) throw ConfigError("record name too long: " + r.name.substr(0, 40));
    if (r.dims.size() > 0xFF) throw ConfigError("record '" + r.name + "' has too many dimensions");
    w.u16(static_cast<std::uint16_t>(r.name.size()));
    w.raw({reinterpret_cast<const std::uint8_t*>(r.name.data()), r.name.size()});
    w.u8(static_cast<std::uint8_t>(r.dtype));
    w.u8(static_cast<std::uint8_t>(r.dims.size()));
    for (const auto d : r.dims) w.u32(d);
    const std::size_t n = element_count(r.dims);
    if (r.dtype == DType::kFloat32) {
      if (r.values.size() != n) throw ShapeError("record '" + r.name + "' payload does not match its dims");
      for (const float v : r.values) w.u32(std::bit_cast<std::uint32_t>(v));
    } else {
      if (r.bytes.size() != n) throw ShapeError("record '" + r.name + "' payload does not match its dims");
      w.raw(r.bytes);
    }
  }
  w.u64(fnv1a64(w.bytes()));
  return std::move(w.bytes());
}

std::vector<TensorRecord> decode_records(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw UnsupportedFormatError("not a noksha checkpoint (bad magic)");
  }
  Reader r(bytes);
  r.take(kMagic.size());
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw UnsupportedVersionError("checkpoint format version " + std::to_string(version) +
                                  " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const auto count = r.u32();
  std::vector<TensorRecord> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorRecord rec;
    const auto name_len = r.u16();
    const auto name = r.take(name_len);
    rec.name.assign(name.begin(), name.end());
    const auto tag = r.u8();
    if (tag > 1) throw IntegrityError("record '" + rec.name + "' has unknown dtype " + std::to_string(tag));
    rec.dtype = static_cast<DType>(tag);
    const auto rank = r.u8();
    for (int d = 0; d < rank; ++d) rec.dims.push_back(r.u32());
    const std::size_t n = element_count(rec.dims);
    if (rec.dtype == DType::kFloat32) {
      const auto payload = r.take(n * 4);
      rec.values.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(payload[4 * k + static_cast<std::size_t>(b)]) << (8 * b);
        rec.values[k] = std::bit_cast<float>(u);
      }
    } else {
      const auto payload = r.take(n);
      rec.bytes.assign(payload.begin(), payload.end());
    }
    out.push_back(std::move(rec));
  }
  const std::size_t body = r.pos();
  const auto stored = r.u64();
  if (stored != fnv1a64(bytes.first(body))) throw IntegrityError("checkpoint checksum mismatch");
  if (r.pos() != bytes.size()) {
    throw IntegrityError("checkpoint has " + std::to_string(bytes.size() - r.pos()) + " trailing bytes");
  }
  return out;
}

std::vector<TensorRecord> to_records(const TrainingCheckpoint& ckpt) {
  std::vector<TensorRecord> out;
  nlohmann::ordered_json meta;
  meta["config"] = to_json(ckpt.config);
  meta["epoch"] = ckpt.epoch;
  meta["step"] = ckpt.step;
  meta["rng"] = {{"key", ckpt.rng_key}, {"counter", ckpt.rng_counter}};
  nlohmann::ordered_json adam = nlohmann::ordered_json::object();
  if (ckpt.generator_adam) adam["generator"] = {{"step", ckpt.generator_adam->step}};
  if (ckpt.discriminator_adam) adam["discriminator"] = {{"step", ckpt.discriminator_adam->step}};
  meta["adam"] = adam;
  const std::string text = meta.dump();
  TensorRecord m;
  m.name = kMetaName;
  m.dtype = DType::kBytes;
  m.dims = {static_cast<std::uint32_t>(text.size())};
  m.bytes.assign(text.begin(), text.end());
  out.push_back(std::move(m));

  auto add_net = [&out](const std::string& prefix, const model::ParameterList& params,
                        const std::optional<nn::AdamState<float>>& adam) {
    for (const auto& p : params) out.push_back(float_record(prefix + "/" + p.name, p.tensor.shape(), p.tensor.data()));
    if (!adam) return;
    if (adam->first_moment.size() != params.size()) throw ShapeError("Adam state does not match " + prefix);
    for (std::size_t i = 0; i < params.size(); ++i) {
      out.push_back(float_record("adam/" + prefix + "/m/" + params[i].name, params[i].tensor.shape(),
                                 adam->first_moment[i]));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      out.push_back(float_record("adam/" + prefix + "/v/" + params[i].name, params[i].tensor.shape(),
                                 adam->second_moment[i]));
    }
  };
  add_net("generator", ckpt.generator, ckpt.generator_adam);
  add_net("discriminator", ckpt.discriminator, ckpt.discriminator_adam);
  return out;
}

TrainingCheckpoint from_records(const std::vector<TensorRecord>& records) {
  std::map<std::string, const TensorRecord*> by_name;
  for (const auto& r : records) {
    if (!by_name.emplace(r.name, &r).second) throw IntegrityError("duplicate record '" + r.name + "'");
  }
  const auto meta_it = by_name.find(kMetaName);
  if (meta_it == by_name.end() || meta_it->second->dtype != DType::kBytes) {
    throw IntegrityError("checkpoint has no meta.json record");
  }
  TrainingCheckpoint ckpt;
  nlohmann::json meta;
  try {
    const auto& b = meta_it->second->bytes;
    meta = nlohmann::json::parse(b.begin(), b.end());
    ckpt.config = train_config_from_json(meta.at("config"));
    ckpt.epoch = meta.at("epoch").get<int>();
    ckpt.step = meta.at("step").get<std::uint64_t>();
    ckpt.rng_key = meta.at("rng").at("key").get<std::uint64_t>();
    ckpt.rng_counter = meta.at("rng").at("counter").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("checkpoint metadata is malformed: ") + e.what());
  }

  std::size_t used = 1;
  auto take = [&](const std::string& name) -> const TensorRecord& {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw IntegrityError("checkpoint is missing record '" + name + "'");
    if (it->second->dtype != DType::kFloat32) throw IntegrityError("record '" + name + "' is not float32");
    ++used;
    return *it->second;
  };
  auto load_net = [&](const std::string& prefix, const std::vector<std::string>& names,
                      model::ParameterList& params, std::optional<nn::AdamState<float>>& adam,
                      const nn::AdamConfig& adam_config) {
    for (const auto& n : names) {
      const auto& rec = take(prefix + "/" + n);
      params.push_back({n, nn::Tensor(to_shape(rec.dims), rec.values)});
    }
    if (!meta.at("adam").contains(prefix)) return;
    nn::AdamState<float> state;
    state.config = adam_config;
    state.step = meta.at("adam").at(prefix).at("step").get<std::uint64_t>();
    for (const auto& n : names) state.first_moment.push_back(take("adam/" + prefix + "/m/" + n).values);
    for (const auto& n : names) state.second_moment.push_back(take("adam/" + prefix + "/v/" + n).values);
    adam = std::move(state);
  };
  load_net("generator", model::Generator::parameter_names(ckpt.config.generator), ckpt.generator,
           ckpt.generator_adam, ckpt.config.generator_adam);
  load_net("discriminator", model::Discriminator::parameter_names(ckpt.config.discriminator),
           ckpt.discriminator, ckpt.discriminator_adam, ckpt.config.discriminator_adam);
  if (used != records.size()) {
    throw IntegrityError("checkpoint holds " + std::to_string(records.size() - used) +
                         " records its config does not account for");
  }
  return ckpt;
}

void save_checkpoint(const fs::path& path, const TrainingCheckpoint& ckpt) {
  const auto bytes = encode_records(to_records(ckpt));
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  imaging::write_file(tmp, bytes);
  fs::rename(tmp, path);
}

TrainingCheckpoint load_checkpoint(const fs::path& path) {
  if (!fs::exists(path)) throw NotFoundError("checkpoint " + path.string() + " does not exist");
  return from_records(decode_records(imaging::read_file(path)));
}

model::Generator restore_generator(const TrainingCheckpoint& ckpt) {
  model::Generator g(ckpt.config.generator, 0);
  model::assign_parameters(g.parameters(), ckpt.generator);
  return g;
}

}  // namespace noksha::train
