#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "noksha/imaging/raster.hpp"

namespace noksha::skeleton {

using imaging::BinaryImage;
using imaging::StructuringElement;

struct SkeletonParams {
  /// Safety cap on full (two-subpass) thinning iterations.
  int max_iterations = 1000;
  /// Reduced-branch mode: erosion applied to the mask before thinning.
  std::optional<StructuringElement> pre_erode_se;
  /// 8-connected components smaller than this are removed before thinning. 0 disables.
  std::size_t min_component_size = 0;
  /// Branches (endpoint to junction) shorter than this are pruned by reduce_branches.
  int spur_length = 5;
  bool prune_spurs = true;

  void validate() const;
};

struct SkeletonResult {
  BinaryImage image;
  int iterations = 0;
  /// False when max_iterations was hit before a pass deleted nothing.
  bool converged = true;
};

/// Two-subpass Zhang–Suen thinning. A subpass deletes foreground pixels p with
/// 2 <= B(p) <= 6, A(p) == 1 and the subpass-specific neighbour products zero, all
/// deletions of a subpass applied at once. A component whose every pixel is marked in a
/// subpass keeps its first pixel in raster order, so no 8-component disappears.
SkeletonResult skeletonize(const BinaryImage& img, const SkeletonParams& params = {});

/// A skeleton branch traced from an endpoint.
struct Branch {
  /// Pixel coordinates (x, y), endpoint first, junction excluded.
  std::vector<std::pair<int, int>> pixels;
  /// Junction pixel the branch attaches to, if it reaches one.
  std::optional<std::pair<int, int>> junction;
};

/// Number of foreground 8-neighbours.
int neighbour_count(const BinaryImage& img, int x, int y);

/// Traces every endpoint (exactly one 8-neighbour) until a junction (three or more
/// neighbours) or a dead end.
std::vector<Branch> find_branches(const BinaryImage& img);

/// Deletes endpoint-to-junction branches shorter than `spur_length`, repeating until
/// none remain. When every branch at a junction is short, the longest is kept.
BinaryImage prune_spurs(const BinaryImage& skeleton, int spur_length);

/// Optional erosion by `pre_erode_se`, then skeletonize, then spur pruning.
SkeletonResult reduce_branches(const BinaryImage& img, const SkeletonParams& params);

}  // namespace noksha::skeleton
