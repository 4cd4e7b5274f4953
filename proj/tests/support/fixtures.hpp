#pragma once

// On-disk datasets for trainer and service tests. Unlike oracles.hpp these use the
// library's own writers.

#include <cstdint>
#include <filesystem>

#include "noksha/dataset/manifest.hpp"

namespace noksha::testing {

// `n` pairs of a thresholded motif (condition) and the motif itself (target), written as
// <dir>/pairs/pNN.png with <dir>/manifest.json. The first `train` go to the train split,
// the rest to test.
std::filesystem::path write_pair_dataset(const std::filesystem::path& dir, int n, int train,
                                         std::uint32_t seed = 0);

}  // namespace noksha::testing
