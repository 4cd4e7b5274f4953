#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "noksha/nn/tensor.hpp"

namespace noksha::nn {

struct AdamConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment buffers for a fixed, ordered parameter list.
template <typename T>
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
};

/// Bias-corrected Adam over `params`, reading each parameter's accumulated gradient.
template <typename T>
class Adam {
 public:
  Adam(std::vector<BasicTensor<T>> params, AdamConfig config = {});

  void step();
  void zero_grad();

  const AdamState<T>& state() const noexcept { return state_; }
  /// Replaces moments and step count (checkpoint restore). Buffer sizes must match.
  void load_state(AdamState<T> state);
  const std::vector<BasicTensor<T>>& params() const noexcept { return params_; }

 private:
  std::vector<BasicTensor<T>> params_;
  AdamState<T> state_;
};

/// One update of a single buffer. `step` is the 1-based count after incrementing.
template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v,
                 std::uint64_t step, const AdamConfig& config);

}  // namespace noksha::nn
