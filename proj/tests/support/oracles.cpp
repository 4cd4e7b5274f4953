#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <deque>
#include <stdexcept>

#include <zlib.h>

namespace noksha::testing {

namespace {

struct Offset {
  int dx, dy;
};

std::vector<Offset> offsets_of(const StructuringElement& se) {
  std::vector<Offset> out;
  for (int r = 0; r < se.height(); ++r)
    for (int c = 0; c < se.width(); ++c)
      if (se.at(r, c)) out.push_back({c - se.origin_col(), r - se.origin_row()});
  return out;
}

int reach(const std::vector<Offset>& offs) {
  int m = 0;
  for (const auto& o : offs) m = std::max({m, std::abs(o.dx), std::abs(o.dy)});
  return m;
}

bool read_bg(const BinaryImage& img, int x, int y) {
  if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return false;
  return img.at(x, y);
}

BinaryImage gather_erode(const BinaryImage& img, const std::vector<Offset>& offs) {
  BinaryImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      bool all = true;
      for (const auto& o : offs) all = all && read_bg(img, x + o.dx, y + o.dy);
      out.set(x, y, all);
    }
  return out;
}

BinaryImage scatter_dilate(const BinaryImage& img, const std::vector<Offset>& offs) {
  BinaryImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      if (!img.at(x, y)) continue;
      for (const auto& o : offs) {
        const int tx = x + o.dx, ty = y + o.dy;
        if (tx >= 0 && ty >= 0 && tx < img.width() && ty < img.height()) out.set(tx, ty, true);
      }
    }
  return out;
}

BinaryImage grow(const BinaryImage& img, int m, bool fill) {
  BinaryImage out(img.width() + 2 * m, img.height() + 2 * m, fill);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.set(x + m, y + m, img.at(x, y));
  return out;
}

BinaryImage shrink(const BinaryImage& img, int m) {
  BinaryImage out(img.width() - 2 * m, img.height() - 2 * m);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out.set(x, y, img.at(x + m, y + m));
  return out;
}

std::vector<std::vector<int>> bfs_labels(const BinaryImage& img, int connectivity, int* count) {
  std::vector<std::vector<int>> lab(img.height(), std::vector<int>(img.width(), 0));
  int next = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      if (!img.at(x, y) || lab[y][x]) continue;
      ++next;
      std::deque<std::pair<int, int>> q{{x, y}};
      lab[y][x] = next;
      while (!q.empty()) {
        auto [cx, cy] = q.front();
        q.pop_front();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (connectivity == 4 && dx != 0 && dy != 0) continue;
            const int nx = cx + dx, ny = cy + dy;
            if (read_bg(img, nx, ny) && !lab[ny][nx]) {
              lab[ny][nx] = next;
              q.emplace_back(nx, ny);
            }
          }
      }
    }
  if (count) *count = next;
  return lab;
}

}  // namespace

BinaryImage brute_erode(const BinaryImage& img, const StructuringElement& se) {
  return gather_erode(img, offsets_of(se));
}

BinaryImage brute_dilate(const BinaryImage& img, const StructuringElement& se) {
  return scatter_dilate(img, offsets_of(se));
}

BinaryImage brute_open(const BinaryImage& img, const StructuringElement& se) {
  return brute_dilate(brute_erode(img, se), se);
}

BinaryImage brute_close(const BinaryImage& img, const StructuringElement& se) {
  const auto offs = offsets_of(se);
  const int m = reach(offs);
  // A dilation of the canvas never reaches further than m outside it.
  return shrink(gather_erode(scatter_dilate(grow(img, m, false), offs), offs), m);
}

BinaryImage brute_dual_erode(const BinaryImage& img, const StructuringElement& se) {
  auto offs = offsets_of(se);
  const int m = reach(offs);
  for (auto& o : offs) o = {-o.dx, -o.dy};
  BinaryImage comp = grow(img, m, false);
  for (int y = 0; y < comp.height(); ++y)
    for (int x = 0; x < comp.width(); ++x) {
      const bool inside = x >= m && y >= m && x < m + img.width() && y < m + img.height();
      comp.set(x, y, inside ? !comp.at(x, y) : true);
    }
  BinaryImage d = shrink(scatter_dilate(comp, offs), m);
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x) d.set(x, y, !d.at(x, y));
  return d;
}

BinaryImage reference_thinning(const BinaryImage& input) {
  BinaryImage img = input;
  auto px = [&](int x, int y) { return read_bg(img, x, y) ? 1 : 0; };
  for (;;) {
    bool changed = false;
    for (int sub = 0; sub < 2; ++sub) {
      std::vector<std::pair<int, int>> marked;
      for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
          if (!img.at(x, y)) continue;
          const int p2 = px(x, y - 1), p3 = px(x + 1, y - 1), p4 = px(x + 1, y), p5 = px(x + 1, y + 1);
          const int p6 = px(x, y + 1), p7 = px(x - 1, y + 1), p8 = px(x - 1, y), p9 = px(x - 1, y - 1);
          const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
          const int seq[9] = {p2, p3, p4, p5, p6, p7, p8, p9, p2};
          int a = 0;
          for (int i = 0; i < 8; ++i) a += (seq[i] == 0 && seq[i + 1] == 1);
          const bool c3 = sub == 0 ? p2 * p4 * p6 == 0 : p2 * p4 * p8 == 0;
          const bool c4 = sub == 0 ? p4 * p6 * p8 == 0 : p2 * p6 * p8 == 0;
          if (b >= 2 && b <= 6 && a == 1 && c3 && c4) marked.emplace_back(x, y);
        }
      if (marked.empty()) continue;
      int ncomp = 0;
      const auto lab = bfs_labels(img, 8, &ncomp);
      std::vector<int> size(ncomp + 1, 0), hits(ncomp + 1, 0);
      for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) size[lab[y][x]] += img.at(x, y);
      for (auto [x, y] : marked) ++hits[lab[y][x]];
      std::vector<bool> spared(ncomp + 1, false);
      for (auto [x, y] : marked) {
        const int k = lab[y][x];
        if (hits[k] == size[k] && !spared[k]) {
          spared[k] = true;
          continue;
        }
        img.set(x, y, false);
        changed = true;
      }
    }
    if (!changed) return img;
  }
}

int flood_fill_count(const BinaryImage& img, int connectivity) {
  int n = 0;
  bfs_labels(img, connectivity, &n);
  return n;
}

BinaryImage random_bitmap(int width, int height, double density, std::mt19937& rng) {
  std::bernoulli_distribution coin(density);
  BinaryImage img(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) img.set(x, y, coin(rng));
  return img;
}

BinaryImage random_blobs(int width, int height, int shapes, std::mt19937& rng) {
  BinaryImage img(width, height);
  std::uniform_int_distribution<int> px(0, width - 1), py(0, height - 1), sz(2, std::max(2, width / 3));
  std::bernoulli_distribution disc(0.5);
  for (int s = 0; s < shapes; ++s) {
    const int cx = px(rng), cy = py(rng), a = sz(rng), b = sz(rng);
    const bool round = disc(rng);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const bool in = round ? (x - cx) * (x - cx) + (y - cy) * (y - cy) <= a * a / 2
                              : x >= cx && x < cx + a && y >= cy && y < cy + b;
        if (in) img.set(x, y, true);
      }
  }
  return img;
}

BinaryImage from_rows(const std::vector<std::string>& rows) {
  BinaryImage img(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()));
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) img.set(x, y, rows[y][x] == '#');
  return img;
}

std::string to_rows(const BinaryImage& img) {
  std::string s;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) s += img.at(x, y) ? '#' : '.';
    s += '\n';
  }
  return s;
}

RasterImage zlib_png_decode(const std::vector<std::uint8_t>& b) {
  auto be32 = [&](std::size_t i) {
    return std::uint32_t(b.at(i)) << 24 | std::uint32_t(b.at(i + 1)) << 16 | std::uint32_t(b.at(i + 2)) << 8 |
           b.at(i + 3);
  };
  static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (b.size() < 8 || std::memcmp(b.data(), sig, 8) != 0) throw std::runtime_error("not a png");
  int w = 0, h = 0, depth = 0, ctype = 0;
  std::vector<std::uint8_t> idat;
  for (std::size_t i = 8; i + 8 <= b.size();) {
    const std::uint32_t len = be32(i);
    const std::string type(b.begin() + i + 4, b.begin() + i + 8);
    const std::size_t data = i + 8;
    if (type == "IHDR") {
      w = static_cast<int>(be32(data));
      h = static_cast<int>(be32(data + 4));
      depth = b[data + 8];
      ctype = b[data + 9];
      if (b[data + 12] != 0) throw std::runtime_error("interlaced");
    } else if (type == "IDAT") {
      idat.insert(idat.end(), b.begin() + data, b.begin() + data + len);
    } else if (type == "IEND") {
      break;
    }
    i = data + len + 4;
  }
  if (depth != 8) throw std::runtime_error("depth");
  const int spp = ctype == 0 ? 1 : ctype == 2 ? 3 : ctype == 6 ? 4 : ctype == 4 ? 2 : 0;
  if (spp == 0) throw std::runtime_error("color type");
  const std::size_t stride = static_cast<std::size_t>(w) * spp;
  std::vector<std::uint8_t> raw((stride + 1) * h);
  uLongf raw_len = raw.size();
  if (uncompress(raw.data(), &raw_len, idat.data(), idat.size()) != Z_OK || raw_len != raw.size())
    throw std::runtime_error("inflate");
  std::vector<std::uint8_t> img(stride * h);
  for (int y = 0; y < h; ++y) {
    const std::uint8_t filter = raw[y * (stride + 1)];
    const std::uint8_t* src = &raw[y * (stride + 1) + 1];
    std::uint8_t* row = &img[y * stride];
    const std::uint8_t* up = y > 0 ? &img[(y - 1) * stride] : nullptr;
    for (std::size_t i = 0; i < stride; ++i) {
      const int a = i >= static_cast<std::size_t>(spp) ? row[i - spp] : 0;
      const int u = up ? up[i] : 0;
      const int c = (up && i >= static_cast<std::size_t>(spp)) ? up[i - spp] : 0;
      int pred = 0;
      switch (filter) {
        case 0: pred = 0; break;
        case 1: pred = a; break;
        case 2: pred = u; break;
        case 3: pred = (a + u) / 2; break;
        case 4: {
          const int p = a + u - c, pa = std::abs(p - a), pb = std::abs(p - u), pc = std::abs(p - c);
          pred = (pa <= pb && pa <= pc) ? a : (pb <= pc ? u : c);
          break;
        }
        default: throw std::runtime_error("filter");
      }
      row[i] = static_cast<std::uint8_t>(src[i] + pred);
    }
  }
  if (spp == 1 || spp == 3) return RasterImage(w, h, spp, std::move(img));
  throw std::runtime_error("alpha not handled by the oracle");
}

RasterImage synthetic_motif(int side, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> noise(-6, 6);
  RasterImage img(side, side, 3);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>(228 + noise(rng));
  std::uniform_int_distribution<int> pos(side / 8, side - side / 8), ink(20, 90);
  const std::array<std::uint8_t, 3> color = {static_cast<std::uint8_t>(ink(rng)), static_cast<std::uint8_t>(ink(rng)),
                                             static_cast<std::uint8_t>(ink(rng))};
  auto stamp = [&](double fx, double fy, double r) {
    for (int y = std::max(0, int(fy - r)); y <= std::min(side - 1, int(fy + r)); ++y)
      for (int x = std::max(0, int(fx - r)); x <= std::min(side - 1, int(fx + r)); ++x)
        if ((x - fx) * (x - fx) + (y - fy) * (y - fy) <= r * r)
          for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[c];
  };
  const double thick = std::max(2.0, side / 40.0);
  const int strokes = 3 + static_cast<int>(seed % 3);
  for (int s = 0; s < strokes; ++s) {
    const double x0 = pos(rng), y0 = pos(rng), x1 = pos(rng), y1 = pos(rng);
    for (int t = 0; t <= 200; ++t) stamp(x0 + (x1 - x0) * t / 200.0, y0 + (y1 - y0) * t / 200.0, thick);
  }
  const double cx = pos(rng), cy = pos(rng), rr = side / 6.0;
  for (int t = 0; t < 360; ++t)
    stamp(cx + rr * std::cos(t * M_PI / 180.0), cy + rr * std::sin(t * M_PI / 180.0), thick * 0.8);
  for (int d = 0; d < 4; ++d) stamp(pos(rng), pos(rng), thick * 1.6);
  return img;
}

std::vector<std::uint8_t> make_ustar(const std::vector<ArchiveFile>& files) {
  std::vector<std::uint8_t> out;
  for (const auto& f : files) {
    std::array<char, 512> h{};
    std::memcpy(h.data(), f.name.data(), std::min<std::size_t>(f.name.size(), 100));
    std::snprintf(&h[100], 8, "%07o", 0644);
    std::snprintf(&h[108], 8, "%07o", 0);
    std::snprintf(&h[116], 8, "%07o", 0);
    std::snprintf(&h[124], 12, "%011lo", static_cast<unsigned long>(f.data.size()));
    std::snprintf(&h[136], 12, "%011o", 0);
    std::memset(&h[148], ' ', 8);
    h[156] = '0';
    std::memcpy(&h[257], "ustar", 6);
    std::memcpy(&h[263], "00", 2);
    unsigned sum = 0;
    for (char c : h) sum += static_cast<unsigned char>(c);
    std::snprintf(&h[148], 7, "%06o", sum);
    h[154] = '\0';
    h[155] = ' ';
    out.insert(out.end(), h.begin(), h.end());
    out.insert(out.end(), f.data.begin(), f.data.end());
    out.resize((out.size() + 511) / 512 * 512, 0);
  }
  out.resize(out.size() + 1024, 0);
  return out;
}

namespace {

std::vector<std::uint8_t> deflate_with(const std::vector<std::uint8_t>& raw, int window_bits) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, window_bits, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw std::runtime_error("deflateInit2");
  std::vector<std::uint8_t> out(deflateBound(&zs, raw.size()) + 32);
  zs.next_in = const_cast<Bytef*>(raw.data());
  zs.avail_in = static_cast<uInt>(raw.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw std::runtime_error("deflate");
  return out;
}

void put16(std::vector<std::uint8_t>& v, std::uint32_t x) {
  v.push_back(x & 0xff);
  v.push_back((x >> 8) & 0xff);
}
void put32(std::vector<std::uint8_t>& v, std::uint32_t x) {
  put16(v, x & 0xffff);
  put16(v, x >> 16);
}

}  // namespace

std::vector<std::uint8_t> gzip_bytes(const std::vector<std::uint8_t>& raw) { return deflate_with(raw, 31); }

std::vector<std::uint8_t> make_zip(const std::vector<ArchiveFile>& files, bool deflate) {
  std::vector<std::uint8_t> out, central;
  for (const auto& f : files) {
    const auto crc = static_cast<std::uint32_t>(crc32(0, f.data.data(), static_cast<uInt>(f.data.size())));
    const auto body = deflate ? deflate_with(f.data, -15) : f.data;
    const auto offset = static_cast<std::uint32_t>(out.size());
    auto header = [&](std::vector<std::uint8_t>& v, bool is_central) {
      put32(v, is_central ? 0x02014b50 : 0x04034b50);
      if (is_central) put16(v, 20);
      put16(v, 20);
      put16(v, 0);
      put16(v, deflate ? 8 : 0);
      put16(v, 0);
      put16(v, 0x21);
      put32(v, crc);
      put32(v, static_cast<std::uint32_t>(body.size()));
      put32(v, static_cast<std::uint32_t>(f.data.size()));
      put16(v, static_cast<std::uint32_t>(f.name.size()));
      put16(v, 0);
      if (is_central) {
        put16(v, 0);
        put16(v, 0);
        put16(v, 0);
        put32(v, 0);
        put32(v, offset);
      }
      v.insert(v.end(), f.name.begin(), f.name.end());
    };
    header(out, false);
    out.insert(out.end(), body.begin(), body.end());
    header(central, true);
  }
  const auto cd_offset = static_cast<std::uint32_t>(out.size());
  out.insert(out.end(), central.begin(), central.end());
  put32(out, 0x06054b50);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint32_t>(files.size()));
  put16(out, static_cast<std::uint32_t>(files.size()));
  put32(out, static_cast<std::uint32_t>(central.size()));
  put32(out, cd_offset);
  put16(out, 0);
  return out;
}

TempDir::TempDir(const std::string& tag) {
  std::random_device rd;
  for (int attempt = 0; attempt < 16; ++attempt) {
    auto p = std::filesystem::temp_directory_path() / (tag + "-" + std::to_string(rd()));
    if (std::filesystem::create_directory(p)) {
      path_ = p;
      return;
    }
  }
  throw std::runtime_error("could not create a temporary directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

double gradient_error(const std::function<nn::Tensor64(const std::vector<nn::Tensor64>&)>& f,
                      std::vector<nn::Tensor64> inputs, double eps) {
  for (auto& t : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  nn::backward(f(inputs));
  double worst = 0.0;
  for (auto& t : inputs) {
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    std::vector<double> numeric(t.numel());
    {
      nn::NoGradGuard guard;
      auto data = t.mutable_data();
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double saved = data[i];
        data[i] = saved + eps;
        const double up = f(inputs).item();
        data[i] = saved - eps;
        const double down = f(inputs).item();
        data[i] = saved;
        numeric[i] = (up - down) / (2 * eps);
      }
    }
    double diff = 0, na = 0, nn2 = 0;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
      na += analytic[i] * analytic[i];
      nn2 += numeric[i] * numeric[i];
    }
    const double denom = std::max({std::sqrt(na), std::sqrt(nn2), 1e-12});
    worst = std::max(worst, std::sqrt(diff) / denom);
  }
  return worst;
}

nn::Tensor64 random_tensor(nn::Shape shape, std::mt19937& rng, double low, double high) {
  std::uniform_real_distribution<double> dist(low, high);
  std::vector<double> v(nn::numel(shape));
  for (auto& x : v) x = dist(rng);
  return nn::Tensor64(std::move(shape), std::move(v));
}

}  // namespace noksha::testing
