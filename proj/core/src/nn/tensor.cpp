#include "noksha/nn/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <unordered_map>
#include <unordered_set>

#include "noksha/error.hpp"

namespace noksha::nn {

namespace {

std::atomic<std::uint64_t> g_sequence{0};
thread_local bool t_grad_enabled = true;

std::uint64_t next_seq() { return g_sequence.fetch_add(1, std::memory_order_relaxed) + 1; }

}  // namespace

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

bool grad_enabled() noexcept { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

template <typename T>
BasicTensor<T>::BasicTensor() : BasicTensor(Shape{0}) {}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill) : impl_(std::make_shared<TensorImpl<T>>()) {
  impl_->data.assign(nn::numel(shape), fill);
  impl_->shape = std::move(shape);
  impl_->seq = next_seq();
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data)
    : impl_(std::make_shared<TensorImpl<T>>()) {
  if (data.size() != nn::numel(shape)) {
    throw ShapeError("tensor data of length " + std::to_string(data.size()) +
                     " does not match shape " + shape_string(shape));
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->seq = next_seq();
}

template <typename T>
BasicTensor<T> BasicTensor<T>::randn(Shape shape, CounterRng& rng, T mean, T stddev) {
  BasicTensor t(std::move(shape));
  for (auto& v : t.impl_->data) v = static_cast<T>(mean + stddev * rng.normal());
  return t;
}

template <typename T>
BasicTensor<T> BasicTensor<T>::uniform(Shape shape, CounterRng& rng, T low, T high) {
  BasicTensor t(std::move(shape));
  for (auto& v : t.impl_->data) v = static_cast<T>(low + (high - low) * rng.uniform());
  return t;
}

template <typename T>
T BasicTensor<T>::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape()));
  return impl_->data[0];
}

template <typename T>
BasicTensor<T>& BasicTensor<T>::set_requires_grad(bool on) {
  impl_->requires_grad = on;
  if (on && impl_->grad.size() != impl_->data.size()) impl_->grad.assign(impl_->data.size(), T{0});
  if (!on) impl_->grad.clear();
  return *this;
}

template <typename T>
void BasicTensor<T>::zero_grad() {
  std::fill(impl_->grad.begin(), impl_->grad.end(), T{0});
}

template <typename T>
BasicTensor<T> BasicTensor<T>::detach() const {
  return BasicTensor(impl_->shape, impl_->data);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::from_op(const char* op, Shape shape, std::vector<T> data,
                                       std::vector<BasicTensor> inputs,
                                       decltype(Node<T>::backward) backward_fn) {
  BasicTensor out(std::move(shape), std::move(data));
  if (!t_grad_enabled) return out;
  const bool any = std::any_of(inputs.begin(), inputs.end(),
                               [](const BasicTensor& t) { return t.requires_grad(); });
  if (!any) return out;
  auto node = std::make_shared<Node<T>>();
  node->op = op;
  node->inputs.reserve(inputs.size());
  for (auto& in : inputs) node->inputs.push_back(in.impl_);
  node->backward = std::move(backward_fn);
  out.impl_->requires_grad = true;
  out.impl_->grad_fn = std::move(node);
  return out;
}

template <typename T>
void backward(const BasicTensor<T>& loss) {
  if (loss.numel() != 1) {
    throw ShapeError("backward needs a one-element loss, got shape " + shape_string(loss.shape()));
  }
  if (!loss.requires_grad()) return;

  // Collect every non-leaf reachable from the loss.
  std::vector<TensorImpl<T>*> order;
  std::unordered_set<TensorImpl<T>*> seen;
  std::vector<TensorImpl<T>*> stack{loss.impl().get()};
  while (!stack.empty()) {
    auto* t = stack.back();
    stack.pop_back();
    if (!t->grad_fn || !seen.insert(t).second) continue;
    order.push_back(t);
    for (const auto& in : t->grad_fn->inputs)
      if (in->requires_grad) stack.push_back(in.get());
  }
  std::sort(order.begin(), order.end(),
            [](const TensorImpl<T>* a, const TensorImpl<T>* b) { return a->seq > b->seq; });

  // Gradients of intermediate tensors live only for this sweep.
  std::unordered_map<TensorImpl<T>*, std::vector<T>> pending;
  pending[loss.impl().get()] = std::vector<T>(1, T{1});

  std::vector<std::span<T>> input_grads;
  for (auto* t : order) {
    auto it = pending.find(t);
    if (it == pending.end()) continue;
    const std::vector<T> grad_out = std::move(it->second);
    pending.erase(it);

    const auto& node = *t->grad_fn;
    input_grads.assign(node.inputs.size(), std::span<T>{});
    for (std::size_t i = 0; i < node.inputs.size(); ++i) {
      auto* in = node.inputs[i].get();
      if (!in->requires_grad) continue;
      if (in->grad_fn) {
        auto& buf = pending[in];
        if (buf.empty()) buf.assign(in->data.size(), T{0});
        input_grads[i] = buf;
      } else {
        if (in->grad.size() != in->data.size()) in->grad.assign(in->data.size(), T{0});
        input_grads[i] = in->grad;
      }
    }
    node.backward(grad_out, input_grads);
  }
}

template class BasicTensor<float>;
template class BasicTensor<double>;
template void backward<float>(const BasicTensor<float>&);
template void backward<double>(const BasicTensor<double>&);

}  // namespace noksha::nn
