#include "noksha/nn/ops.hpp"

#include <algorithm>
#include <cmath>

#include "kernels.hpp"
#include "noksha/error.hpp"

namespace noksha::nn {

namespace {

template <typename T>
using Impl = std::shared_ptr<TensorImpl<T>>;

void require_rank(const Shape& s, std::size_t rank, const char* op, const char* what) {
  if (s.size() != rank) {
    throw ShapeError(std::string(op) + ": " + what + " must have rank " + std::to_string(rank) +
                     ", got " + shape_string(s));
  }
}

void require_same(const Shape& a, const Shape& b, const char* op) {
  if (a != b) throw ShapeError(std::string(op) + ": shape " + shape_string(a) + " vs " + shape_string(b));
}

kernels::ConvGeometry geometry(std::size_t channels, std::size_t h, std::size_t w, std::size_t k,
                               ConvOptions opt, const char* op, const Shape& in_shape,
                               const Shape& w_shape) {
  const long span_h = static_cast<long>(h) + 2L * opt.padding - static_cast<long>(k);
  const long span_w = static_cast<long>(w) + 2L * opt.padding - static_cast<long>(k);
  if (opt.stride < 1 || opt.padding < 0 || span_h < 0 || span_w < 0 || span_h % opt.stride != 0 ||
      span_w % opt.stride != 0) {
    throw ShapeError(std::string(op) + ": input " + shape_string(in_shape) + " and weight " +
                     shape_string(w_shape) + " give a non-integral output with stride " +
                     std::to_string(opt.stride) + ", padding " + std::to_string(opt.padding));
  }
  return kernels::ConvGeometry{channels,
                               h,
                               w,
                               k,
                               static_cast<std::size_t>(opt.stride),
                               static_cast<std::size_t>(opt.padding),
                               static_cast<std::size_t>(span_h / opt.stride + 1),
                               static_cast<std::size_t>(span_w / opt.stride + 1)};
}

template <typename T, typename F, typename G>
BasicTensor<T> unary(const char* op, const BasicTensor<T>& x, F forward, G derivative) {
  std::vector<T> out(x.numel());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = forward(in[i]);
  Impl<T> xi = x.impl();
  return BasicTensor<T>::from_op(
      op, x.shape(), std::move(out), {x},
      [xi, derivative](std::span<const T> g, std::span<const std::span<T>> grads) {
        const auto& xd = xi->data;
        for (std::size_t i = 0; i < g.size(); ++i) grads[0][i] += g[i] * derivative(xd[i]);
      });
}

}  // namespace

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const std::optional<BasicTensor<T>>& bias, ConvOptions opt) {
  constexpr const char* op = "conv2d";
  require_rank(input.shape(), 4, op, "input");
  require_rank(weight.shape(), 4, op, "weight");
  const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t o = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != c || weight.dim(3) != k) {
    throw ShapeError("conv2d: input " + shape_string(input.shape()) + " vs weight " +
                     shape_string(weight.shape()));
  }
  if (bias && bias->shape() != Shape{o}) {
    throw ShapeError("conv2d: bias " + shape_string(bias->shape()) + " vs weight " +
                     shape_string(weight.shape()));
  }
  const auto g = geometry(c, h, w, k, opt, op, input.shape(), weight.shape());
  const std::size_t rows = g.patch_rows(), cols = g.patch_cols();

  std::vector<T> out(n * o * cols, T{0});
  std::vector<T> col(rows * cols);
  for (std::size_t s = 0; s < n; ++s) {
    kernels::im2col(g, input.data().data() + s * c * h * w, col.data());
    T* y = out.data() + s * o * cols;
    kernels::gemm_nn(o, cols, rows, weight.data().data(), col.data(), y);
    if (bias)
      for (std::size_t oc = 0; oc < o; ++oc)
        for (std::size_t j = 0; j < cols; ++j) y[oc * cols + j] += bias->data()[oc];
  }

  std::vector<BasicTensor<T>> inputs{input, weight};
  if (bias) inputs.push_back(*bias);
  Impl<T> xi = input.impl(), wi = weight.impl();
  const bool has_bias = bias.has_value();
  return BasicTensor<T>::from_op(
      op, Shape{n, o, g.out_height, g.out_width}, std::move(out), std::move(inputs),
      [xi, wi, g, n, o, has_bias](std::span<const T> gy, std::span<const std::span<T>> grads) {
        const std::size_t rows = g.patch_rows(), cols = g.patch_cols();
        const std::size_t in_size = g.channels * g.height * g.width;
        std::vector<T> col(rows * cols);
        std::vector<T> dcol(rows * cols);
        for (std::size_t s = 0; s < n; ++s) {
          const T* dy = gy.data() + s * o * cols;
          if (!grads[1].empty()) {
            kernels::im2col(g, xi->data.data() + s * in_size, col.data());
            kernels::gemm_nt(o, rows, cols, dy, col.data(), grads[1].data());
          }
          if (!grads[0].empty()) {
            std::fill(dcol.begin(), dcol.end(), T{0});
            kernels::gemm_tn(rows, cols, o, wi->data.data(), dy, dcol.data());
            kernels::col2im(g, dcol.data(), grads[0].data() + s * in_size);
          }
          if (has_bias && !grads[2].empty())
            for (std::size_t oc = 0; oc < o; ++oc) {
              T acc{0};
              for (std::size_t j = 0; j < cols; ++j) acc += dy[oc * cols + j];
              grads[2][oc] += acc;
            }
        }
      });
}

template <typename T>
BasicTensor<T> conv_transpose2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                                const std::optional<BasicTensor<T>>& bias, ConvOptions opt) {
  constexpr const char* op = "conv_transpose2d";
  require_rank(input.shape(), 4, op, "input");
  require_rank(weight.shape(), 4, op, "weight");
  const std::size_t n = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t cout = weight.dim(1), k = weight.dim(2);
  if (weight.dim(0) != cin || weight.dim(3) != k) {
    throw ShapeError("conv_transpose2d: input " + shape_string(input.shape()) + " vs weight " +
                     shape_string(weight.shape()));
  }
  if (bias && bias->shape() != Shape{cout}) {
    throw ShapeError("conv_transpose2d: bias " + shape_string(bias->shape()) + " vs weight " +
                     shape_string(weight.shape()));
  }
  const long oh = (static_cast<long>(h) - 1) * opt.stride - 2L * opt.padding + static_cast<long>(k);
  const long ow = (static_cast<long>(w) - 1) * opt.stride - 2L * opt.padding + static_cast<long>(k);
  if (opt.stride < 1 || oh < 1 || ow < 1) {
    throw ShapeError("conv_transpose2d: input " + shape_string(input.shape()) + " and weight " +
                     shape_string(weight.shape()) + " give an empty output");
  }
  // Geometry of the forward convolution this op is the adjoint of.
  const auto g = geometry(cout, static_cast<std::size_t>(oh), static_cast<std::size_t>(ow), k, opt,
                          op, input.shape(), weight.shape());
  const std::size_t rows = g.patch_rows(), cols = g.patch_cols();  // cols == h*w
  const std::size_t out_size = cout * g.height * g.width;

  std::vector<T> out(n * out_size, T{0});
  std::vector<T> col(rows * cols);
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(col.begin(), col.end(), T{0});
    kernels::gemm_tn(rows, cols, cin, weight.data().data(), input.data().data() + s * cin * cols,
                     col.data());
    T* y = out.data() + s * out_size;
    kernels::col2im(g, col.data(), y);
    if (bias) {
      const std::size_t plane = g.height * g.width;
      for (std::size_t oc = 0; oc < cout; ++oc)
        for (std::size_t j = 0; j < plane; ++j) y[oc * plane + j] += bias->data()[oc];
    }
  }

  std::vector<BasicTensor<T>> inputs{input, weight};
  if (bias) inputs.push_back(*bias);
  Impl<T> xi = input.impl(), wi = weight.impl();
  const bool has_bias = bias.has_value();
  return BasicTensor<T>::from_op(
      op, Shape{n, cout, g.height, g.width}, std::move(out), std::move(inputs),
      [xi, wi, g, n, cin, has_bias](std::span<const T> gy, std::span<const std::span<T>> grads) {
        const std::size_t rows = g.patch_rows(), cols = g.patch_cols();
        const std::size_t out_size = g.channels * g.height * g.width;
        const std::size_t plane = g.height * g.width;
        std::vector<T> dcol(rows * cols);
        for (std::size_t s = 0; s < n; ++s) {
          const T* dy = gy.data() + s * out_size;
          kernels::im2col(g, dy, dcol.data());
          if (!grads[0].empty())
            kernels::gemm_nn(cin, cols, rows, wi->data.data(), dcol.data(),
                             grads[0].data() + s * cin * cols);
          if (!grads[1].empty())
            kernels::gemm_nt(cin, rows, cols, xi->data.data() + s * cin * cols, dcol.data(),
                             grads[1].data());
          if (has_bias && !grads[2].empty())
            for (std::size_t oc = 0; oc < g.channels; ++oc) {
              T acc{0};
              for (std::size_t j = 0; j < plane; ++j) acc += dy[oc * plane + j];
              grads[2][oc] += acc;
            }
        }
      });
}

template <typename T>
BasicTensor<T> instance_norm(const BasicTensor<T>& input, const BasicTensor<T>& gamma,
                             const BasicTensor<T>& beta, T epsilon) {
  constexpr const char* op = "instance_norm";
  require_rank(input.shape(), 4, op, "input");
  const std::size_t n = input.dim(0), c = input.dim(1), plane = input.dim(2) * input.dim(3);
  if (gamma.shape() != Shape{c} || beta.shape() != Shape{c}) {
    throw ShapeError("instance_norm: gamma " + shape_string(gamma.shape()) + ", beta " +
                     shape_string(beta.shape()) + " vs input " + shape_string(input.shape()));
  }
  std::vector<T> out(input.numel());
  // Normalised values and inverse std are kept for the backward pass.
  auto xhat = std::make_shared<std::vector<T>>(input.numel());
  auto inv_std = std::make_shared<std::vector<T>>(n * c);
  const auto x = input.data();
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t base = (s * c + ch) * plane;
      double md = 0.0;
      for (std::size_t i = 0; i < plane; ++i) md += x[base + i];
      const T m = static_cast<T>(md / static_cast<double>(plane));
      double var = 0.0;
      for (std::size_t i = 0; i < plane; ++i) var += double(x[base + i] - m) * double(x[base + i] - m);
      var /= static_cast<double>(plane);
      const T is = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(epsilon)));
      (*inv_std)[s * c + ch] = is;
      for (std::size_t i = 0; i < plane; ++i) {
        const T xh = (x[base + i] - m) * is;
        (*xhat)[base + i] = xh;
        out[base + i] = gamma.data()[ch] * xh + beta.data()[ch];
      }
    }
  Impl<T> gi = gamma.impl();
  return BasicTensor<T>::from_op(
      op, input.shape(), std::move(out), {input, gamma, beta},
      [gi, xhat, inv_std, n, c, plane](std::span<const T> gy, std::span<const std::span<T>> grads) {
        const auto& xh = *xhat;
        for (std::size_t s = 0; s < n; ++s)
          for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t base = (s * c + ch) * plane;
            T sum_dy{0}, sum_dy_xh{0};
            for (std::size_t i = 0; i < plane; ++i) {
              sum_dy += gy[base + i];
              sum_dy_xh += gy[base + i] * xh[base + i];
            }
            if (!grads[1].empty()) grads[1][ch] += sum_dy_xh;
            if (!grads[2].empty()) grads[2][ch] += sum_dy;
            if (!grads[0].empty()) {
              const T gam = gi->data[ch];
              const T is = (*inv_std)[s * c + ch];
              const T inv_n = T{1} / static_cast<T>(plane);
              for (std::size_t i = 0; i < plane; ++i) {
                const T dxh = gy[base + i] * gam;
                grads[0][base + i] +=
                    is * (dxh - gam * sum_dy * inv_n - xh[base + i] * gam * sum_dy_xh * inv_n);
              }
            }
          }
      });
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x) {
  return unary(
      "relu", x, [](T v) { return v > T{0} ? v : T{0}; },
      [](T v) { return v > T{0} ? T{1} : T{0}; });
}

template <typename T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& x, T slope) {
  return unary(
      "leaky_relu", x, [slope](T v) { return v > T{0} ? v : slope * v; },
      [slope](T v) { return v > T{0} ? T{1} : slope; });
}

template <typename T>
BasicTensor<T> tanh(const BasicTensor<T>& x) {
  return unary(
      "tanh", x, [](T v) { return std::tanh(v); },
      [](T v) {
        const T t = std::tanh(v);
        return T{1} - t * t;
      });
}

namespace {

template <typename T>
T stable_sigmoid(T v) {
  if (v >= T{0}) return T{1} / (T{1} + std::exp(-v));
  const T e = std::exp(v);
  return e / (T{1} + e);
}

}  // namespace

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x) {
  return unary(
      "sigmoid", x, [](T v) { return stable_sigmoid(v); },
      [](T v) {
        const T s = stable_sigmoid(v);
        return s * (T{1} - s);
      });
}

template <typename T>
BasicTensor<T> dropout(const BasicTensor<T>& x, double rate, CounterRng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
  if (rate == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  auto mask = std::make_shared<std::vector<T>>(x.numel());
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = rng.uniform() >= rate ? keep_scale : T{0};
    out[i] = x.data()[i] * (*mask)[i];
  }
  return BasicTensor<T>::from_op("dropout", x.shape(), std::move(out), {x},
                                 [mask](std::span<const T> g, std::span<const std::span<T>> grads) {
                                   for (std::size_t i = 0; i < g.size(); ++i)
                                     grads[0][i] += g[i] * (*mask)[i];
                                 });
}

template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_rank(a.shape(), 4, "concat_channels", "first operand");
  require_rank(b.shape(), 4, "concat_channels", "second operand");
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3)) {
    throw ShapeError("concat_channels: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  const std::size_t n = a.dim(0), ca = a.dim(1), cb = b.dim(1), plane = a.dim(2) * a.dim(3);
  std::vector<T> out(a.numel() + b.numel());
  for (std::size_t s = 0; s < n; ++s) {
    std::copy_n(a.data().data() + s * ca * plane, ca * plane, out.data() + s * (ca + cb) * plane);
    std::copy_n(b.data().data() + s * cb * plane, cb * plane,
                out.data() + s * (ca + cb) * plane + ca * plane);
  }
  return BasicTensor<T>::from_op(
      "concat_channels", Shape{n, ca + cb, a.dim(2), a.dim(3)}, std::move(out), {a, b},
      [n, ca, cb, plane](std::span<const T> g, std::span<const std::span<T>> grads) {
        for (std::size_t s = 0; s < n; ++s) {
          const T* src = g.data() + s * (ca + cb) * plane;
          if (!grads[0].empty())
            for (std::size_t i = 0; i < ca * plane; ++i) grads[0][s * ca * plane + i] += src[i];
          if (!grads[1].empty())
            for (std::size_t i = 0; i < cb * plane; ++i)
              grads[1][s * cb * plane + i] += src[ca * plane + i];
        }
      });
}

template <typename T>
BasicTensor<T> slice_channels(const BasicTensor<T>& x, std::size_t begin, std::size_t end) {
  require_rank(x.shape(), 4, "slice_channels", "input");
  const std::size_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  if (begin >= end || end > c) {
    throw ShapeError("slice_channels: [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") outside " + shape_string(x.shape()));
  }
  const std::size_t width = end - begin;
  std::vector<T> out(n * width * plane);
  for (std::size_t s = 0; s < n; ++s)
    std::copy_n(x.data().data() + (s * c + begin) * plane, width * plane,
                out.data() + s * width * plane);
  return BasicTensor<T>::from_op(
      "slice_channels", Shape{n, width, x.dim(2), x.dim(3)}, std::move(out), {x},
      [n, c, begin, width, plane](std::span<const T> g, std::span<const std::span<T>> grads) {
        for (std::size_t s = 0; s < n; ++s)
          for (std::size_t i = 0; i < width * plane; ++i)
            grads[0][(s * c + begin) * plane + i] += g[s * width * plane + i];
      });
}

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same(a.shape(), b.shape(), "add");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return BasicTensor<T>::from_op("add", a.shape(), std::move(out), {a, b},
                                 [](std::span<const T> g, std::span<const std::span<T>> grads) {
                                   for (const auto& dst : grads)
                                     if (!dst.empty())
                                       for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
                                 });
}

template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same(a.shape(), b.shape(), "mul");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  Impl<T> ai = a.impl(), bi = b.impl();
  return BasicTensor<T>::from_op(
      "mul", a.shape(), std::move(out), {a, b},
      [ai, bi](std::span<const T> g, std::span<const std::span<T>> grads) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (!grads[0].empty()) grads[0][i] += g[i] * bi->data[i];
          if (!grads[1].empty()) grads[1][i] += g[i] * ai->data[i];
        }
      });
}

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& x, T factor) {
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * factor;
  return BasicTensor<T>::from_op("scale", x.shape(), std::move(out), {x},
                                 [factor](std::span<const T> g, std::span<const std::span<T>> grads) {
                                   for (std::size_t i = 0; i < g.size(); ++i) grads[0][i] += g[i] * factor;
                                 });
}

template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& x) {
  double acc = 0.0;
  for (auto v : x.data()) acc += v;
  return BasicTensor<T>::from_op("sum", Shape{1}, std::vector<T>{static_cast<T>(acc)}, {x},
                                 [](std::span<const T> g, std::span<const std::span<T>> grads) {
                                   for (auto& v : grads[0]) v += g[0];
                                 });
}

template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& x) {
  if (x.numel() == 0) throw ShapeError("mean of an empty tensor");
  return scale(sum(x), T{1} / static_cast<T>(x.numel()));
}

template <typename T>
BasicTensor<T> l1_loss(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same(a.shape(), b.shape(), "l1_loss");
  const std::size_t n = a.numel();
  if (n == 0) throw ShapeError("l1_loss of empty tensors");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(a.data()[i] - b.data()[i]);
  Impl<T> ai = a.impl(), bi = b.impl();
  return BasicTensor<T>::from_op(
      "l1_loss", Shape{1}, std::vector<T>{static_cast<T>(acc / static_cast<double>(n))}, {a, b},
      [ai, bi, n](std::span<const T> g, std::span<const std::span<T>> grads) {
        const T step = g[0] / static_cast<T>(n);
        for (std::size_t i = 0; i < n; ++i) {
          const T d = ai->data[i] - bi->data[i];
          const T sgn = d > T{0} ? T{1} : (d < T{0} ? T{-1} : T{0});
          if (!grads[0].empty()) grads[0][i] += step * sgn;
          if (!grads[1].empty()) grads[1][i] -= step * sgn;
        }
      });
}

template <typename T>
BasicTensor<T> bce_with_logits(const BasicTensor<T>& logits, const BasicTensor<T>& labels) {
  require_same(logits.shape(), labels.shape(), "bce_with_logits");
  const std::size_t n = logits.numel();
  if (n == 0) throw ShapeError("bce_with_logits of empty tensors");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double l = logits.data()[i];
    const double t = labels.data()[i];
    acc += std::max(l, 0.0) - l * t + std::log1p(std::exp(-std::abs(l)));
  }
  Impl<T> li = logits.impl();
  auto label_values = std::make_shared<std::vector<T>>(labels.data().begin(), labels.data().end());
  return BasicTensor<T>::from_op(
      "bce_with_logits", Shape{1}, std::vector<T>{static_cast<T>(acc / static_cast<double>(n))}, {logits},
      [li, label_values, n](std::span<const T> g, std::span<const std::span<T>> grads) {
        const T step = g[0] / static_cast<T>(n);
        for (std::size_t i = 0; i < n; ++i)
          grads[0][i] += step * (stable_sigmoid(li->data[i]) - (*label_values)[i]);
      });
}

template <typename T>
BasicTensor<T> bce_with_logits(const BasicTensor<T>& logits, T label) {
  return bce_with_logits(logits, BasicTensor<T>(logits.shape(), label));
}

#define NOKSHA_INSTANTIATE_OPS(T)                                                                 \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&,                   \
                                 const std::optional<BasicTensor<T>>&, ConvOptions);             \
  template BasicTensor<T> conv_transpose2d(const BasicTensor<T>&, const BasicTensor<T>&,         \
                                           const std::optional<BasicTensor<T>>&, ConvOptions);   \
  template BasicTensor<T> instance_norm(const BasicTensor<T>&, const BasicTensor<T>&,            \
                                        const BasicTensor<T>&, T);                               \
  template BasicTensor<T> relu(const BasicTensor<T>&);                                           \
  template BasicTensor<T> leaky_relu(const BasicTensor<T>&, T);                                  \
  template BasicTensor<T> tanh(const BasicTensor<T>&);                                           \
  template BasicTensor<T> sigmoid(const BasicTensor<T>&);                                        \
  template BasicTensor<T> dropout(const BasicTensor<T>&, double, CounterRng&);                   \
  template BasicTensor<T> concat_channels(const BasicTensor<T>&, const BasicTensor<T>&);         \
  template BasicTensor<T> slice_channels(const BasicTensor<T>&, std::size_t, std::size_t);       \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);                     \
  template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);                     \
  template BasicTensor<T> scale(const BasicTensor<T>&, T);                                       \
  template BasicTensor<T> sum(const BasicTensor<T>&);                                            \
  template BasicTensor<T> mean(const BasicTensor<T>&);                                           \
  template BasicTensor<T> l1_loss(const BasicTensor<T>&, const BasicTensor<T>&);                 \
  template BasicTensor<T> bce_with_logits(const BasicTensor<T>&, const BasicTensor<T>&);         \
  template BasicTensor<T> bce_with_logits(const BasicTensor<T>&, T);

NOKSHA_INSTANTIATE_OPS(float)
NOKSHA_INSTANTIATE_OPS(double)

#undef NOKSHA_INSTANTIATE_OPS

}  // namespace noksha::nn
