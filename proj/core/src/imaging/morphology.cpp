#include "noksha/imaging/morphology.hpp"

#include <span>
#include <utility>

#include "noksha/error.hpp"
#include "noksha/imaging/ops.hpp"

namespace noksha::imaging {

namespace {

struct Offset {
  int dx;
  int dy;
};

// Offsets of the true cells relative to the origin.
std::vector<Offset> cell_offsets(const StructuringElement& se) {
  std::vector<Offset> offsets;
  for (int r = 0; r < se.height(); ++r)
    for (int c = 0; c < se.width(); ++c)
      if (se.at(r, c)) offsets.push_back({c - se.origin_col(), r - se.origin_row()});
  return offsets;
}

}  // namespace

BinaryImage erode(const BinaryImage& img, const StructuringElement& se) {
  const auto offsets = cell_offsets(se);
  BinaryImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      bool all = true;
      for (const auto& o : offsets) {
        if (!img.get_or_background(x + o.dx, y + o.dy)) {
          all = false;
          break;
        }
      }
      out.set(x, y, all);
    }
  return out;
}

BinaryImage dilate(const BinaryImage& img, const StructuringElement& se) {
  const auto offsets = cell_offsets(se);
  BinaryImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      bool any = false;
      // Reflected element: a foreground pixel at q marks q + offset.
      for (const auto& o : offsets) {
        if (img.get_or_background(x - o.dx, y - o.dy)) {
          any = true;
          break;
        }
      }
      out.set(x, y, any);
    }
  return out;
}

BinaryImage pad(const BinaryImage& img, int border, bool value) {
  if (border < 0) throw ConfigError("pad border must be non-negative");
  BinaryImage out(img.width() + 2 * border, img.height() + 2 * border, value);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.set(x + border, y + border, img.at(x, y));
  return out;
}

BinaryImage open(const BinaryImage& img, const StructuringElement& se) {
  return dilate(erode(img, se), se);
}

BinaryImage close(const BinaryImage& img, const StructuringElement& se) {
  const int border = se.extent();
  const BinaryImage grown = dilate(pad(img, border), se);
  return crop(erode(grown, se), Rect{border, border, img.width(), img.height()});
}

Components connected_components(const BinaryImage& img, Connectivity connectivity) {
  Components comps;
  comps.width = img.width();
  comps.height = img.height();
  comps.labels.assign(static_cast<std::size_t>(img.width()) * img.height(), 0);

  static constexpr Offset kFour[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  static constexpr Offset kEight[] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1},
                                      {1, 1},  {1, -1}, {-1, 1}, {-1, -1}};
  const std::span<const Offset> neighbours =
      connectivity == Connectivity::kFour ? std::span<const Offset>(kFour)
                                          : std::span<const Offset>(kEight);

  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      if (!img.at(x, y) || comps.label_at(x, y) != 0) continue;
      const int label = static_cast<int>(comps.sizes.size()) + 1;
      std::size_t size = 0;
      stack.assign(1, {x, y});
      comps.labels[static_cast<std::size_t>(y) * img.width() + x] = label;
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        ++size;
        for (const auto& n : neighbours) {
          const int nx = cx + n.dx;
          const int ny = cy + n.dy;
          if (!img.get_or_background(nx, ny)) continue;
          auto& slot = comps.labels[static_cast<std::size_t>(ny) * img.width() + nx];
          if (slot == 0) {
            slot = label;
            stack.emplace_back(nx, ny);
          }
        }
      }
      comps.sizes.push_back(size);
    }
  return comps;
}

BinaryImage remove_small_components(const BinaryImage& img, std::size_t min_size,
                                    Connectivity connectivity) {
  if (min_size <= 1) return img;
  const auto comps = connected_components(img, connectivity);
  BinaryImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const int label = comps.label_at(x, y);
      if (label != 0 && comps.sizes[static_cast<std::size_t>(label - 1)] >= min_size) out.set(x, y, true);
    }
  return out;
}

}  // namespace noksha::imaging
