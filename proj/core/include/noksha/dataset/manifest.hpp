#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "noksha/dataset/pair.hpp"

namespace noksha::dataset {

enum class Split { kTrain, kTest };

std::string_view to_string(Split s);
Split split_from_string(std::string_view s);

struct ManifestEntry {
  std::string id;
  /// Pair PNG, relative to the manifest's directory.
  std::string path;
  Provenance provenance = Provenance::kAutoSkeleton;
  std::optional<AugmentOp> augmentation;
  Split split = Split::kTrain;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct SplitCounts {
  std::size_t total = 0;
  std::size_t train = 0;
  std::size_t test = 0;

  friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

struct DatasetManifest {
  /// One of skeleton, reduced, sketch, boundary, enhanced.
  std::string variant;
  std::string source_checksum;
  std::vector<ManifestEntry> entries;

  SplitCounts counts() const;
  std::vector<const ManifestEntry*> entries_in(Split split) const;

  /// Throws IntegrityError on duplicate or empty ids.
  void validate() const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// Canonical JSON text: two-space indent, fixed key order, trailing newline.
std::string manifest_to_json(const DatasetManifest& manifest);

/// Parses and validates; a "counts" block disagreeing with the entries is an IntegrityError.
DatasetManifest manifest_from_json(std::string_view text);

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Seeded Fisher–Yates shuffle of the entries; the first floor(ratio * total) become train.
/// Entry order in the result is unchanged, only the split fields are rewritten.
DatasetManifest split_dataset(const DatasetManifest& manifest, double ratio, std::uint64_t seed);

}  // namespace noksha::dataset
