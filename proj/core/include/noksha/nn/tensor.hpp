#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "noksha/nn/rng.hpp"

namespace noksha::nn {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

template <typename T>
struct TensorImpl;

/// One recorded operation: the tensors it read and how to push an output gradient back
/// into them. `input_grads[i]` is empty when input i does not require a gradient.
template <typename T>
struct Node {
  const char* op = "";
  std::vector<std::shared_ptr<TensorImpl<T>>> inputs;
  std::function<void(std::span<const T> grad_out, std::span<const std::span<T>> input_grads)>
      backward;
};

template <typename T>
struct TensorImpl {
  Shape shape;
  std::vector<T> data;
  /// Accumulated gradient; allocated for leaves that require grad.
  std::vector<T> grad;
  bool requires_grad = false;
  std::shared_ptr<Node<T>> grad_fn;
  /// Creation order; backward visits nodes by decreasing sequence.
  std::uint64_t seq = 0;
};

/// Dense row-major tensor handle. Copies share storage; ops never write into their
/// inputs. Images use N, C, H, W.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor();
  explicit BasicTensor(Shape shape, T fill = T{0});
  BasicTensor(Shape shape, std::vector<T> data);

  static BasicTensor scalar(T v) { return BasicTensor(Shape{1}, std::vector<T>{v}); }
  static BasicTensor randn(Shape shape, CounterRng& rng, T mean = T{0}, T stddev = T{1});
  static BasicTensor uniform(Shape shape, CounterRng& rng, T low, T high);

  const Shape& shape() const noexcept { return impl_->shape; }
  std::size_t dim(std::size_t i) const { return impl_->shape.at(i); }
  std::size_t rank() const noexcept { return impl_->shape.size(); }
  std::size_t numel() const noexcept { return impl_->data.size(); }

  std::span<const T> data() const noexcept { return impl_->data; }
  /// Direct write access for parameter updates and loaders. Not for use on tensors that
  /// are inputs of a live graph.
  std::span<T> mutable_data() noexcept { return impl_->data; }
  T item() const;

  bool requires_grad() const noexcept { return impl_->requires_grad; }
  /// Marks a leaf as trainable and allocates a zeroed gradient.
  BasicTensor& set_requires_grad(bool on = true);
  /// Empty span for tensors without an accumulated gradient.
  std::span<const T> grad() const noexcept { return impl_->grad; }
  std::span<T> mutable_grad() noexcept { return impl_->grad; }
  void zero_grad();

  /// Same values, no history, does not require grad.
  BasicTensor detach() const;
  BasicTensor clone() const { return detach(); }

  bool is_leaf() const noexcept { return impl_->grad_fn == nullptr; }
  const std::shared_ptr<TensorImpl<T>>& impl() const noexcept { return impl_; }

  /// Builds the output of a differentiable op. Records `backward` only when grad mode is
  /// on and an input requires grad.
  static BasicTensor from_op(const char* op, Shape shape, std::vector<T> data,
                             std::vector<BasicTensor> inputs,
                             decltype(Node<T>::backward) backward);

 private:
  explicit BasicTensor(std::shared_ptr<TensorImpl<T>> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<TensorImpl<T>> impl_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

/// Reverse-mode sweep from a one-element loss. Leaves that require grad accumulate
/// (sum) into their gradient buffers; unreached leaves are untouched.
template <typename T>
void backward(const BasicTensor<T>& loss);

/// Thread-local switch for graph recording.
bool grad_enabled() noexcept;

/// Disables graph recording on this thread for its lifetime (inference).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Copies values between precisions (history is not kept).
template <typename To, typename From>
BasicTensor<To> cast(const BasicTensor<From>& t) {
  std::vector<To> out(t.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<To>(t.data()[i]);
  return BasicTensor<To>(t.shape(), std::move(out));
}

}  // namespace noksha::nn
