#include "noksha/skeleton/skeleton.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <map>
#include <set>
#include <tuple>

#include "noksha/error.hpp"
#include "noksha/imaging/morphology.hpp"

namespace noksha::skeleton {

namespace {

// Neighbour bit order: bit 0 = P2 (north), then clockwise P3..P9.
constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

constexpr std::array<std::uint8_t, 256> make_table(int subpass) {
  std::array<std::uint8_t, 256> table{};
  for (int code = 0; code < 256; ++code) {
    int p[8];
    int b = 0;
    for (int i = 0; i < 8; ++i) {
      p[i] = (code >> i) & 1;
      b += p[i];
    }
    int a = 0;
    for (int i = 0; i < 8; ++i) a += (p[i] == 0 && p[(i + 1) % 8] == 1) ? 1 : 0;
    const int p2 = p[0], p4 = p[2], p6 = p[4], p8 = p[6];
    const bool directional = subpass == 0 ? (p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0)
                                          : (p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0);
    table[static_cast<std::size_t>(code)] = (b >= 2 && b <= 6 && a == 1 && directional) ? 1 : 0;
  }
  return table;
}

constexpr auto kFirstSubpass = make_table(0);
constexpr auto kSecondSubpass = make_table(1);

int neighbour_code(const BinaryImage& img, int x, int y) {
  int code = 0;
  for (int i = 0; i < 8; ++i)
    if (img.get_or_background(x + kDx[i], y + kDy[i])) code |= 1 << i;
  return code;
}

// Marks deletable pixels for one subpass, then unmarks the raster-first pixel of any
// component that would otherwise vanish.
std::vector<std::pair<int, int>> subpass_marks(const BinaryImage& img,
                                               const std::array<std::uint8_t, 256>& table) {
  std::vector<std::pair<int, int>> marks;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (img.at(x, y) && table[static_cast<std::size_t>(neighbour_code(img, x, y))])
        marks.emplace_back(x, y);
  if (marks.empty()) return marks;

  const auto comps = imaging::connected_components(img, imaging::Connectivity::kEight);
  std::vector<std::size_t> marked(comps.count(), 0);
  for (const auto& [x, y] : marks) ++marked[static_cast<std::size_t>(comps.label_at(x, y) - 1)];
  std::vector<bool> keep_first(comps.count(), false);
  bool any = false;
  for (std::size_t k = 0; k < comps.count(); ++k) {
    keep_first[k] = marked[k] == comps.sizes[k];
    any = any || keep_first[k];
  }
  if (!any) return marks;

  std::vector<std::pair<int, int>> filtered;
  filtered.reserve(marks.size());
  // `marks` is in raster order, so the first mark seen for a label is its first pixel.
  for (const auto& m : marks) {
    const auto k = static_cast<std::size_t>(comps.label_at(m.first, m.second) - 1);
    if (keep_first[k]) {
      keep_first[k] = false;
      continue;
    }
    filtered.push_back(m);
  }
  return filtered;
}

// A pixel left behind where a spur met a stroke at an angle: two or more neighbours that
// stay 8-connected to each other without it.
bool redundant(const BinaryImage& img, int x, int y) {
  std::vector<std::pair<int, int>> nb;
  for (int i = 0; i < 8; ++i)
    if (img.get_or_background(x + kDx[i], y + kDy[i])) nb.emplace_back(x + kDx[i], y + kDy[i]);
  if (nb.size() < 2) return false;
  std::vector<bool> reached(nb.size(), false);
  std::vector<std::size_t> stack{0};
  reached[0] = true;
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < nb.size(); ++j) {
      if (reached[j]) continue;
      if (std::max(std::abs(nb[i].first - nb[j].first), std::abs(nb[i].second - nb[j].second)) == 1) {
        reached[j] = true;
        stack.push_back(j);
      }
    }
  }
  return std::all_of(reached.begin(), reached.end(), [](bool r) { return r; });
}

}  // namespace

void SkeletonParams::validate() const {
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (spur_length < 0) throw ConfigError("spur_length must be >= 0");
}

SkeletonResult skeletonize(const BinaryImage& img, const SkeletonParams& params) {
  params.validate();
  SkeletonResult result{
      imaging::remove_small_components(img, params.min_component_size), 0, false};
  BinaryImage& work = result.image;
  while (result.iterations < params.max_iterations) {
    ++result.iterations;
    bool changed = false;
    for (const auto* table : {&kFirstSubpass, &kSecondSubpass}) {
      const auto marks = subpass_marks(work, *table);
      for (const auto& [x, y] : marks) work.set(x, y, false);
      changed = changed || !marks.empty();
    }
    if (!changed) {
      result.converged = true;
      break;
    }
  }
  return result;
}

int neighbour_count(const BinaryImage& img, int x, int y) {
  int n = 0;
  for (int i = 0; i < 8; ++i) n += img.get_or_background(x + kDx[i], y + kDy[i]) ? 1 : 0;
  return n;
}

std::vector<Branch> find_branches(const BinaryImage& img) {
  std::vector<Branch> branches;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      if (!img.at(x, y) || neighbour_count(img, x, y) != 1) continue;
      Branch branch;
      branch.pixels.emplace_back(x, y);
      std::set<std::pair<int, int>> seen{{x, y}};
      int cx = x, cy = y;
      while (true) {
        if (branch.pixels.size() > 1 && neighbour_count(img, cx, cy) >= 3) {
          branch.junction = std::make_pair(cx, cy);
          branch.pixels.pop_back();
          break;
        }
        std::vector<std::pair<int, int>> next;
        for (int i = 0; i < 8; ++i) {
          const int nx = cx + kDx[i];
          const int ny = cy + kDy[i];
          if (img.get_or_background(nx, ny) && !seen.contains({nx, ny})) next.emplace_back(nx, ny);
        }
        if (next.empty()) break;
        if (next.size() > 1) {
          // Ambiguous continuation: treat the current pixel as the junction.
          branch.junction = std::make_pair(cx, cy);
          branch.pixels.pop_back();
          break;
        }
        std::tie(cx, cy) = next.front();
        seen.insert(next.front());
        branch.pixels.push_back(next.front());
      }
      branches.push_back(std::move(branch));
    }
  return branches;
}

BinaryImage prune_spurs(const BinaryImage& skeleton, int spur_length) {
  BinaryImage out = skeleton;
  if (spur_length <= 1) return out;
  while (true) {
    const auto branches = find_branches(out);
    // Group the short junction-terminated branches by junction.
    std::map<std::pair<int, int>, std::vector<const Branch*>> by_junction;
    for (const auto& b : branches)
      if (b.junction && !b.pixels.empty() && static_cast<int>(b.pixels.size()) < spur_length)
        by_junction[*b.junction].push_back(&b);
    if (by_junction.empty()) break;

    bool changed = false;
    for (auto& [junction, spurs] : by_junction) {
      // Neighbours of the junction that do not start one of these spurs.
      int other = neighbour_count(out, junction.first, junction.second);
      for (const auto* s : spurs) {
        const auto& last = s->pixels.back();
        if (std::max(std::abs(last.first - junction.first), std::abs(last.second - junction.second)) == 1)
          --other;
      }
      const Branch* keep = nullptr;
      if (other <= 0) {
        keep = *std::max_element(spurs.begin(), spurs.end(), [](const Branch* a, const Branch* b) {
          return a->pixels.size() < b->pixels.size();
        });
      }
      bool removed = false;
      for (const auto* s : spurs) {
        if (s == keep) continue;
        for (const auto& [x, y] : s->pixels) out.set(x, y, false);
        removed = true;
      }
      if (removed && redundant(out, junction.first, junction.second)) out.set(junction.first, junction.second, false);
      changed = changed || removed;
    }
    if (!changed) break;
  }
  return out;
}

SkeletonResult reduce_branches(const BinaryImage& img, const SkeletonParams& params) {
  params.validate();
  const BinaryImage eroded = params.pre_erode_se ? imaging::erode(img, *params.pre_erode_se) : img;
  SkeletonResult result = skeletonize(eroded, params);
  if (params.prune_spurs) result.image = prune_spurs(result.image, params.spur_length);
  return result;
}

}  // namespace noksha::skeleton
