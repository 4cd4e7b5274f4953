#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace noksha::dataset {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

enum class ArchiveKind { kTar, kTarGzip, kZip };

/// Sniffs magic bytes; throws IntegrityError when nothing matches.
ArchiveKind detect_archive(std::span<const std::uint8_t> bytes);

/// Unpacks regular files under `dest`, returning their relative paths in archive order.
/// Absolute paths and ".." components are refused; truncation, bad header checksums and
/// CRC mismatches raise IntegrityError.
std::vector<std::string> extract_archive(std::span<const std::uint8_t> bytes,
                                         const std::filesystem::path& dest);

struct FetchOptions {
  /// Pinned SHA-256 of the archive bytes.
  std::optional<std::string> expected_hash;
  int max_attempts = 3;
  std::chrono::milliseconds retry_delay{500};
  long timeout_seconds = 120;
};

struct FetchResult {
  std::string content_hash;
  std::filesystem::path root;
  std::vector<std::string> files;
  bool cache_hit = false;
};

/// Name of the record fetch_dataset leaves in its destination directory.
inline constexpr const char* kFetchRecordName = ".noksha-fetch.json";

/// Downloads (file://, http://, https://), hashes and extracts an archive into `dest`.
/// A previous fetch of the same URL whose files are still present is reused without
/// downloading. Transport failures are retried, then surface as NetworkError.
FetchResult fetch_dataset(const std::string& url, const std::filesystem::path& dest,
                          const FetchOptions& options = {});

/// Raw bytes behind a URL, with the retry policy of fetch_dataset.
std::vector<std::uint8_t> download(const std::string& url, const FetchOptions& options = {});

/// Content hash recorded by the nearest fetch at or above `dir`, if any.
std::optional<std::string> recorded_source_hash(const std::filesystem::path& dir);

/// SHA-256 over the sorted relative paths and contents of every regular file below `dir`.
std::string hash_tree(const std::filesystem::path& dir);

}  // namespace noksha::dataset
