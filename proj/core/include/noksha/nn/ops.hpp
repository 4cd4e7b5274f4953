#pragma once

#include <optional>

#include "noksha/nn/rng.hpp"
#include "noksha/nn/tensor.hpp"

namespace noksha::nn {

struct ConvOptions {
  int stride = 1;
  int padding = 0;
};

/// Cross-correlation. input (N,C,H,W), weight (O,C,k,k), bias (O). Requires
/// (H + 2p - k) divisible by the stride.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const std::optional<BasicTensor<T>>& bias, ConvOptions opt = {});

/// Adjoint of conv2d's linear map. input (N,Cin,H,W), weight (Cin,Cout,k,k), bias (Cout);
/// output side (H-1)s - 2p + k.
template <typename T>
BasicTensor<T> conv_transpose2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                                const std::optional<BasicTensor<T>>& bias, ConvOptions opt = {});

/// Per-sample, per-channel standardisation followed by gamma/beta (shape (C)).
template <typename T>
BasicTensor<T> instance_norm(const BasicTensor<T>& input, const BasicTensor<T>& gamma,
                             const BasicTensor<T>& beta, T epsilon = T(1e-5));

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x);
template <typename T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& x, T slope);
template <typename T>
BasicTensor<T> tanh(const BasicTensor<T>& x);
template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x);

/// Zeroes each element with probability `rate` and scales survivors by 1/(1-rate).
/// Rate 0 returns `x` itself.
template <typename T>
BasicTensor<T> dropout(const BasicTensor<T>& x, double rate, CounterRng& rng);

/// Concatenation along dim 1 of two (N,C,H,W) tensors.
template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// Channels [begin, end) of an (N,C,H,W) tensor.
template <typename T>
BasicTensor<T> slice_channels(const BasicTensor<T>& x, std::size_t begin, std::size_t end);

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& x, T factor);
template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& x);
template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& x);
/// Elementwise product.
template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// Mean absolute difference; subgradient zero at ties.
template <typename T>
BasicTensor<T> l1_loss(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// Mean of max(l,0) - l*t + log(1 + exp(-|l|)). Labels are constants.
template <typename T>
BasicTensor<T> bce_with_logits(const BasicTensor<T>& logits, const BasicTensor<T>& labels);
template <typename T>
BasicTensor<T> bce_with_logits(const BasicTensor<T>& logits, T label);

}  // namespace noksha::nn
