#include "noksha/dataset/manifest.hpp"

#include <cmath>
#include <numeric>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "noksha/error.hpp"
#include "noksha/imaging/png.hpp"
#include "noksha/nn/rng.hpp"

namespace noksha::dataset {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Split s) { return s == Split::kTrain ? "train" : "test"; }

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  throw ConfigError("unknown split '" + std::string(s) + "'");
}

SplitCounts DatasetManifest::counts() const {
  SplitCounts c;
  c.total = entries.size();
  for (const auto& e : entries) (e.split == Split::kTrain ? c.train : c.test) += 1;
  return c;
}

std::vector<const ManifestEntry*> DatasetManifest::entries_in(Split split) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries)
    if (e.split == split) out.push_back(&e);
  return out;
}

void DatasetManifest::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& e : entries) {
    if (e.id.empty()) throw IntegrityError("manifest entry with empty id");
    if (!seen.insert(e.id).second) throw IntegrityError("duplicate manifest id '" + e.id + "'");
  }
}

std::string manifest_to_json(const DatasetManifest& manifest) {
  manifest.validate();
  ojson doc;
  doc["variant"] = manifest.variant;
  doc["source_checksum"] = manifest.source_checksum;
  ojson pairs = ojson::array();
  for (const auto& e : manifest.entries) {
    ojson p;
    p["id"] = e.id;
    p["path"] = e.path;
    p["provenance"] = std::string(to_string(e.provenance));
    p["augmentation"] = e.augmentation ? ojson(std::string(to_string(*e.augmentation))) : ojson(nullptr);
    p["split"] = std::string(to_string(e.split));
    pairs.push_back(std::move(p));
  }
  doc["pairs"] = std::move(pairs);
  const auto c = manifest.counts();
  doc["counts"] = {{"total", c.total}, {"train", c.train}, {"test", c.test}};
  return doc.dump(2) + "\n";
}

DatasetManifest manifest_from_json(std::string_view text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DecodeError(std::string("manifest is not valid JSON: ") + e.what(), e.byte);
  }
  DatasetManifest m;
  try {
    m.variant = doc.at("variant").get<std::string>();
    m.source_checksum = doc.at("source_checksum").get<std::string>();
    for (const auto& p : doc.at("pairs")) {
      ManifestEntry e;
      e.id = p.at("id").get<std::string>();
      e.path = p.at("path").get<std::string>();
      e.provenance = provenance_from_string(p.at("provenance").get<std::string>());
      if (!p.at("augmentation").is_null()) {
        e.augmentation = augment_op_from_string(p.at("augmentation").get<std::string>());
      }
      e.split = split_from_string(p.at("split").get<std::string>());
      m.entries.push_back(std::move(e));
    }
    const auto& c = doc.at("counts");
    const SplitCounts stored{c.at("total").get<std::size_t>(), c.at("train").get<std::size_t>(),
                             c.at("test").get<std::size_t>()};
    const SplitCounts actual = m.counts();
    if (stored != actual) {
      throw IntegrityError("manifest counts " + std::to_string(stored.total) + "/" +
                           std::to_string(stored.train) + "/" + std::to_string(stored.test) +
                           " disagree with its entries " + std::to_string(actual.total) + "/" +
                           std::to_string(actual.train) + "/" + std::to_string(actual.test));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  m.validate();
  return m;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  const std::string text = manifest_to_json(manifest);
  imaging::write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  const auto bytes = imaging::read_file(path);
  return manifest_from_json({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

DatasetManifest split_dataset(const DatasetManifest& manifest, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  const std::size_t total = manifest.entries.size();
  if (total == 0) throw ConfigError("cannot split an empty manifest");

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  nn::CounterRng rng(seed);
  for (std::size_t i = total - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(order[i], order[j]);
  }
  // The small slack keeps products like 0.9 * 10 from landing just under an integer.
  const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(total) + 1e-9));

  DatasetManifest out = manifest;
  for (std::size_t k = 0; k < total; ++k) {
    out.entries[order[k]].split = k < n_train ? Split::kTrain : Split::kTest;
  }
  return out;
}

}  // namespace noksha::dataset
