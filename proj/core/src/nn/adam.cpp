#include "noksha/nn/adam.hpp"

#include <cmath>

#include "noksha/error.hpp"

namespace noksha::nn {

template <typename T>
void adam_update(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v,
                 std::uint64_t step, const AdamConfig& config) {
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
    throw ShapeError("adam_update: buffer sizes disagree");
  }
  const double t = static_cast<double>(step);
  const T b1 = static_cast<T>(config.beta1);
  const T b2 = static_cast<T>(config.beta2);
  const T correction1 = static_cast<T>(1.0 - std::pow(config.beta1, t));
  const T correction2 = static_cast<T>(1.0 - std::pow(config.beta2, t));
  const T lr = static_cast<T>(config.learning_rate);
  const T eps = static_cast<T>(config.epsilon);
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = b1 * m[i] + (T{1} - b1) * grad[i];
    v[i] = b2 * v[i] + (T{1} - b2) * grad[i] * grad[i];
    const T m_hat = m[i] / correction1;
    const T v_hat = v[i] / correction2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

template <typename T>
Adam<T>::Adam(std::vector<BasicTensor<T>> params, AdamConfig config) : params_(std::move(params)) {
  state_.config = config;
  for (auto& p : params_) {
    if (!p.requires_grad()) p.set_requires_grad(true);
    state_.first_moment.emplace_back(p.numel(), T{0});
    state_.second_moment.emplace_back(p.numel(), T{0});
  }
}

template <typename T>
void Adam<T>::step() {
  ++state_.step;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    adam_update<T>(p.mutable_data(), p.grad(), state_.first_moment[i], state_.second_moment[i],
                   state_.step, state_.config);
  }
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template <typename T>
void Adam<T>::load_state(AdamState<T> state) {
  if (state.first_moment.size() != params_.size() || state.second_moment.size() != params_.size()) {
    throw ShapeError("Adam state holds " + std::to_string(state.first_moment.size()) +
                     " buffers for " + std::to_string(params_.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (state.first_moment[i].size() != params_[i].numel() ||
        state.second_moment[i].size() != params_[i].numel()) {
      throw ShapeError("Adam moment buffer " + std::to_string(i) + " does not match its parameter");
    }
  }
  state_ = std::move(state);
}

template class Adam<float>;
template class Adam<double>;
template void adam_update<float>(std::span<float>, std::span<const float>, std::span<float>,
                                 std::span<float>, std::uint64_t, const AdamConfig&);
template void adam_update<double>(std::span<double>, std::span<const double>, std::span<double>,
                                  std::span<double>, std::uint64_t, const AdamConfig&);

}  // namespace noksha::nn
