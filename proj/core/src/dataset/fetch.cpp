#include "noksha/dataset/fetch.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <mutex>
#include <thread>

#include <curl/curl.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <zlib.h>

#include "noksha/error.hpp"
#include "noksha/imaging/png.hpp"

namespace noksha::dataset {

namespace fs = std::filesystem;
using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

std::string sha256_hex(ByteView bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

namespace {

std::uint32_t le16(ByteView b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8);
}
std::uint32_t le32(ByteView b, std::size_t at) { return le16(b, at) | (le16(b, at + 2) << 16); }

// Archive member names become paths below dest only if they stay below it.
fs::path safe_relative(const std::string& name) {
  if (name.empty()) throw IntegrityError("archive member with empty name");
  if (name.front() == '/' || name.find('\\') != std::string::npos || name.find(':') != std::string::npos) {
    throw IntegrityError("archive member '" + name + "' has an unsafe path");
  }
  fs::path rel;
  for (const auto& part : fs::path(name)) {
    if (part == "..") throw IntegrityError("archive member '" + name + "' escapes the destination");
    if (part == "." || part.empty()) continue;
    rel /= part;
  }
  return rel;
}

void write_member(const fs::path& dest, const fs::path& rel, ByteView data) {
  const fs::path out = dest / rel;
  fs::create_directories(out.parent_path());
  imaging::write_file(out, data);
}

Bytes gunzip(ByteView bytes) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 32) != Z_OK) throw Error("zlib initialisation failed");
  Bytes out;
  std::array<std::uint8_t, 1 << 16> chunk{};
  zs.next_in = const_cast<Bytef*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = chunk.data();
    zs.avail_out = static_cast<uInt>(chunk.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      const std::size_t consumed = zs.total_in;
      inflateEnd(&zs);
      throw IntegrityError("corrupt gzip stream (zlib code " + std::to_string(rc) + ", after " +
                           std::to_string(consumed) + " input bytes)");
    }
    out.insert(out.end(), chunk.begin(), chunk.begin() + (chunk.size() - zs.avail_out));
  }
  inflateEnd(&zs);
  return out;
}

Bytes inflate_raw(ByteView bytes, std::size_t expected) {
  z_stream zs{};
  if (inflateInit2(&zs, -15) != Z_OK) throw Error("zlib initialisation failed");
  Bytes out(expected);
  zs.next_in = const_cast<Bytef*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const std::size_t produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) throw IntegrityError("corrupt deflate member");
  return out;
}

std::uint64_t parse_octal(ByteView field) {
  std::uint64_t v = 0;
  bool any = false;
  for (const auto c : field) {
    if (c == 0 || c == ' ') {
      if (any) break;
      continue;
    }
    if (c < '0' || c > '7') throw IntegrityError("tar header has a malformed numeric field");
    v = v * 8 + (c - '0');
    any = true;
  }
  return v;
}

std::string c_string(ByteView field) {
  const auto end = std::find(field.begin(), field.end(), std::uint8_t{0});
  return {field.begin(), end};
}

std::vector<std::string> extract_tar(ByteView tar, const fs::path& dest) {
  constexpr std::size_t kBlock = 512;
  std::vector<std::string> files;
  std::string long_name;
  std::size_t pos = 0;
  bool ended = false;
  while (pos + kBlock <= tar.size()) {
    const ByteView h = tar.subspan(pos, kBlock);
    if (std::all_of(h.begin(), h.end(), [](std::uint8_t b) { return b == 0; })) {
      ended = true;
      break;
    }
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < kBlock; ++i) sum += (i >= 148 && i < 156) ? ' ' : h[i];
    if (sum != parse_octal(h.subspan(148, 8))) {
      throw IntegrityError("tar header checksum mismatch at offset " + std::to_string(pos));
    }
    const std::uint64_t size = parse_octal(h.subspan(124, 12));
    const char type = static_cast<char>(h[156]);
    const std::size_t data_at = pos + kBlock;
    if (size > tar.size() - data_at) throw IntegrityError("tar member truncated at offset " + std::to_string(pos));
    const ByteView data = tar.subspan(data_at, size);

    std::string name = c_string(h.subspan(0, 100));
    if (std::memcmp(h.data() + 257, "ustar", 5) == 0) {
      const std::string prefix = c_string(h.subspan(345, 155));
      if (!prefix.empty()) name = prefix + "/" + name;
    }
    const bool is_entry = type == '0' || type == '\0' || type == '5';
    if (is_entry && !long_name.empty()) {
      name = long_name;
      long_name.clear();
    }

    if (type == 'L') {
      long_name = c_string(data);
    } else if (type == 'x') {
      // pax records: "<len> key=value\n"
      const std::string text(data.begin(), data.end());
      std::size_t at = 0;
      while (at < text.size()) {
        const auto space = text.find(' ', at);
        if (space == std::string::npos) break;
        const auto len = std::stoul(text.substr(at, space - at));
        const std::string rec = text.substr(space + 1, len - (space - at) - 2);
        if (rec.rfind("path=", 0) == 0) long_name = rec.substr(5);
        at += len;
      }
    } else if (type == '0' || type == '\0') {
      const fs::path rel = safe_relative(name);
      write_member(dest, rel, data);
      files.push_back(rel.generic_string());
    } else if (type == '5') {
      fs::create_directories(dest / safe_relative(name));
    }
    // Links, devices and global pax headers carry no file content we need.
    pos = data_at + (size + kBlock - 1) / kBlock * kBlock;
  }
  if (!ended) throw IntegrityError("tar archive truncated (no end-of-archive marker)");
  return files;
}

std::vector<std::string> extract_zip(ByteView zip, const fs::path& dest) {
  constexpr std::size_t kEocdSize = 22;
  if (zip.size() < kEocdSize) throw IntegrityError("zip archive truncated");
  std::size_t eocd = std::string::npos;
  const std::size_t lowest = zip.size() > kEocdSize + 0xFFFF ? zip.size() - kEocdSize - 0xFFFF : 0;
  for (std::size_t i = zip.size() - kEocdSize + 1; i-- > lowest;) {
    if (le32(zip, i) == 0x06054b50) {
      eocd = i;
      break;
    }
  }
  if (eocd == std::string::npos) throw IntegrityError("zip end-of-central-directory record not found");
  const std::size_t count = le16(zip, eocd + 10);
  std::size_t cd = le32(zip, eocd + 16);
  if (le32(zip, eocd + 16) == 0xFFFFFFFF) throw UnsupportedFormatError("ZIP64 archives are not supported");

  std::vector<std::string> files;
  for (std::size_t n = 0; n < count; ++n) {
    if (cd + 46 > zip.size() || le32(zip, cd) != 0x02014b50) {
      throw IntegrityError("zip central directory entry " + std::to_string(n) + " is corrupt");
    }
    const auto method = le16(zip, cd + 10);
    const auto crc = le32(zip, cd + 16);
    const std::size_t csize = le32(zip, cd + 20);
    const std::size_t usize = le32(zip, cd + 24);
    const std::size_t name_len = le16(zip, cd + 28);
    const std::size_t extra_len = le16(zip, cd + 30);
    const std::size_t comment_len = le16(zip, cd + 32);
    const std::size_t local = le32(zip, cd + 42);
    if (cd + 46 + name_len > zip.size()) throw IntegrityError("zip entry name truncated");
    const std::string name(zip.begin() + static_cast<std::ptrdiff_t>(cd + 46),
                           zip.begin() + static_cast<std::ptrdiff_t>(cd + 46 + name_len));
    cd += 46 + name_len + extra_len + comment_len;

    if (!name.empty() && name.back() == '/') {
      fs::create_directories(dest / safe_relative(name));
      continue;
    }
    if (local + 30 > zip.size() || le32(zip, local) != 0x04034b50) {
      throw IntegrityError("zip local header for '" + name + "' is corrupt");
    }
    const std::size_t data_at = local + 30 + le16(zip, local + 26) + le16(zip, local + 28);
    if (data_at > zip.size() || csize > zip.size() - data_at) {
      throw IntegrityError("zip member '" + name + "' truncated");
    }
    const ByteView raw = zip.subspan(data_at, csize);
    Bytes data;
    if (method == 0) {
      data.assign(raw.begin(), raw.end());
    } else if (method == 8) {
      data = inflate_raw(raw, usize);
    } else {
      throw UnsupportedFormatError("zip member '" + name + "' uses compression method " +
                                   std::to_string(method));
    }
    if (crc32(0L, data.data(), static_cast<uInt>(data.size())) != crc) {
      throw IntegrityError("zip member '" + name + "' fails its CRC check");
    }
    const fs::path rel = safe_relative(name);
    write_member(dest, rel, data);
    files.push_back(rel.generic_string());
  }
  return files;
}

std::size_t on_body(char* ptr, std::size_t size, std::size_t nmemb, void* user) {
  auto* buf = static_cast<Bytes*>(user);
  buf->insert(buf->end(), ptr, ptr + size * nmemb);
  return size * nmemb;
}

Bytes http_get_once(const std::string& url, long timeout_seconds) {
  static std::once_flag init;
  std::call_once(init, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
  CURL* curl = curl_easy_init();
  if (curl == nullptr) throw NetworkError("could not create a transfer handle");
  Bytes body;
  curl_easy_setopt(curl, CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl, CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl, CURLOPT_TIMEOUT, timeout_seconds);
  curl_easy_setopt(curl, CURLOPT_NOSIGNAL, 1L);
  curl_easy_setopt(curl, CURLOPT_WRITEFUNCTION, on_body);
  curl_easy_setopt(curl, CURLOPT_WRITEDATA, &body);
  const CURLcode rc = curl_easy_perform(curl);
  long status = 0;
  curl_easy_getinfo(curl, CURLINFO_RESPONSE_CODE, &status);
  curl_easy_cleanup(curl);
  if (rc != CURLE_OK) throw NetworkError("GET " + url + " failed: " + curl_easy_strerror(rc));
  if (status >= 400) {
    throw NetworkError("GET " + url + " returned HTTP " + std::to_string(status), status >= 500);
  }
  return body;
}

nlohmann::json read_record(const fs::path& path) {
  const auto bytes = imaging::read_file(path);
  return nlohmann::json::parse(bytes.begin(), bytes.end());
}

}  // namespace

ArchiveKind detect_archive(ByteView bytes) {
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return ArchiveKind::kTarGzip;
  if (bytes.size() >= 4 && le32(bytes, 0) == 0x04034b50) return ArchiveKind::kZip;
  if (bytes.size() >= 4 && le32(bytes, 0) == 0x06054b50) return ArchiveKind::kZip;  // empty zip
  if (bytes.size() >= 512 && std::memcmp(bytes.data() + 257, "ustar", 5) == 0) return ArchiveKind::kTar;
  throw IntegrityError("data is not a tar, tar.gz or zip archive");
}

std::vector<std::string> extract_archive(ByteView bytes, const fs::path& dest) {
  fs::create_directories(dest);
  switch (detect_archive(bytes)) {
    case ArchiveKind::kTar: return extract_tar(bytes, dest);
    case ArchiveKind::kTarGzip: {
      const Bytes tar = gunzip(bytes);
      return extract_tar(tar, dest);
    }
    case ArchiveKind::kZip: return extract_zip(bytes, dest);
  }
  return {};
}

Bytes download(const std::string& url, const FetchOptions& options) {
  constexpr std::string_view kFile = "file://";
  if (url.rfind(kFile, 0) == 0) {
    const fs::path path = url.substr(kFile.size());
    if (!fs::exists(path)) throw NotFoundError("archive not found: " + path.string());
    return imaging::read_file(path);
  }
  if (url.rfind("http://", 0) != 0 && url.rfind("https://", 0) != 0) {
    throw ConfigError("unsupported URL scheme in '" + url + "'");
  }
  const int attempts = std::max(1, options.max_attempts);
  for (int attempt = 1;; ++attempt) {
    try {
      return http_get_once(url, options.timeout_seconds);
    } catch (const NetworkError& e) {
      if (!e.retryable() || attempt >= attempts) throw;
      std::this_thread::sleep_for(options.retry_delay * attempt);
    }
  }
}

FetchResult fetch_dataset(const std::string& url, const fs::path& dest, const FetchOptions& options) {
  const fs::path record_path = dest / kFetchRecordName;
  if (fs::exists(record_path)) {
    try {
      const auto rec = read_record(record_path);
      const auto hash = rec.at("sha256").get<std::string>();
      const auto files = rec.at("files").get<std::vector<std::string>>();
      const bool pin_ok = !options.expected_hash || *options.expected_hash == hash;
      const bool present =
          std::all_of(files.begin(), files.end(), [&](const std::string& f) { return fs::exists(dest / f); });
      if (rec.at("url").get<std::string>() == url && pin_ok && present) {
        return FetchResult{hash, dest, files, true};
      }
    } catch (const nlohmann::json::exception&) {
      // A damaged record just means fetching again.
    }
  }

  const Bytes archive = download(url, options);
  const std::string hash = sha256_hex(archive);
  if (options.expected_hash && *options.expected_hash != hash) {
    throw IntegrityError("archive hash " + hash + " does not match the pinned " + *options.expected_hash);
  }
  auto files = extract_archive(archive, dest);
  nlohmann::ordered_json rec;
  rec["url"] = url;
  rec["sha256"] = hash;
  rec["files"] = files;
  const std::string text = rec.dump(2) + "\n";
  imaging::write_file(record_path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  return FetchResult{hash, dest, std::move(files), false};
}

std::optional<std::string> recorded_source_hash(const fs::path& dir) {
  std::error_code ec;
  fs::path at = fs::weakly_canonical(dir, ec);
  if (ec) at = fs::absolute(dir);
  while (true) {
    const fs::path rec = at / kFetchRecordName;
    if (fs::exists(rec)) {
      try {
        return read_record(rec).at("sha256").get<std::string>();
      } catch (const nlohmann::json::exception&) {
        return std::nullopt;
      }
    }
    if (!at.has_parent_path() || at.parent_path() == at) return std::nullopt;
    at = at.parent_path();
  }
}

std::string hash_tree(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), dir));
  }
  std::sort(files.begin(), files.end());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  for (const auto& rel : files) {
    const std::string name = rel.generic_string();
    EVP_DigestUpdate(ctx, name.data(), name.size() + 1);  // include the terminator as a separator
    const auto bytes = imaging::read_file(dir / rel);
    const std::uint64_t n = bytes.size();
    EVP_DigestUpdate(ctx, &n, sizeof n);
    EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

}  // namespace noksha::dataset
