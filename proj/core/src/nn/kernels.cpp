#include "kernels.hpp"

#include <algorithm>

namespace noksha::nn::kernels {

namespace {

constexpr std::size_t kColumnBlock = 512;

}  // namespace

template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t j0 = 0; j0 < n; j0 += kColumnBlock) {
    const std::size_t jn = std::min(kColumnBlock, n - j0);
    std::size_t i = 0;
    // Four rows of C per sweep over B.
    for (; i + 4 <= m; i += 4) {
      T* c0 = c + i * n + j0;
      T* c1 = c0 + n;
      T* c2 = c1 + n;
      T* c3 = c2 + n;
      const T* a0 = a + i * k;
      for (std::size_t p = 0; p < k; ++p) {
        const T v0 = a0[p];
        const T v1 = a0[k + p];
        const T v2 = a0[2 * k + p];
        const T v3 = a0[3 * k + p];
        const T* br = b + p * n + j0;
        for (std::size_t j = 0; j < jn; ++j) {
          const T bv = br[j];
          c0[j] += v0 * bv;
          c1[j] += v1 * bv;
          c2[j] += v2 * bv;
          c3[j] += v3 * bv;
        }
      }
    }
    for (; i < m; ++i) {
      T* ci = c + i * n + j0;
      const T* ai = a + i * k;
      for (std::size_t p = 0; p < k; ++p) {
        const T v = ai[p];
        const T* br = b + p * n + j0;
        for (std::size_t j = 0; j < jn; ++j) ci[j] += v * br[j];
      }
    }
  }
}

template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  std::vector<T> at(m * k);
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t i = 0; i < m; ++i) at[i * k + p] = a[p * m + i];
  gemm_nn(m, n, k, at.data(), b, c);
}

template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  std::vector<T> bt(k * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
  gemm_nn(m, n, k, a, bt.data(), c);
}

template <typename T>
void im2col(const ConvGeometry& g, const T* image, T* col) {
  const std::size_t cols = g.patch_cols();
  for (std::size_t c = 0; c < g.channels; ++c)
    for (std::size_t ky = 0; ky < g.kernel; ++ky)
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        T* row = col + ((c * g.kernel + ky) * g.kernel + kx) * cols;
        for (std::size_t oy = 0; oy < g.out_height; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.padding);
          T* dst = row + oy * g.out_width;
          if (iy < 0 || iy >= static_cast<long>(g.height)) {
            std::fill(dst, dst + g.out_width, T{0});
            continue;
          }
          const T* src = image + (c * g.height + static_cast<std::size_t>(iy)) * g.width;
          for (std::size_t ox = 0; ox < g.out_width; ++ox) {
            const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.padding);
            dst[ox] = (ix < 0 || ix >= static_cast<long>(g.width)) ? T{0}
                                                                     : src[static_cast<std::size_t>(ix)];
          }
        }
      }
}

template <typename T>
void col2im(const ConvGeometry& g, const T* col, T* image) {
  const std::size_t cols = g.patch_cols();
  for (std::size_t c = 0; c < g.channels; ++c)
    for (std::size_t ky = 0; ky < g.kernel; ++ky)
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        const T* row = col + ((c * g.kernel + ky) * g.kernel + kx) * cols;
        for (std::size_t oy = 0; oy < g.out_height; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.padding);
          if (iy < 0 || iy >= static_cast<long>(g.height)) continue;
          T* dst = image + (c * g.height + static_cast<std::size_t>(iy)) * g.width;
          const T* src = row + oy * g.out_width;
          for (std::size_t ox = 0; ox < g.out_width; ++ox) {
            const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.padding);
            if (ix >= 0 && ix < static_cast<long>(g.width)) dst[static_cast<std::size_t>(ix)] += src[ox];
          }
        }
      }
}

#define NOKSHA_INSTANTIATE_KERNELS(T)                                                     \
  template void gemm_nn<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*); \
  template void gemm_tn<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*); \
  template void gemm_nt<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*); \
  template void im2col<T>(const ConvGeometry&, const T*, T*);                             \
  template void col2im<T>(const ConvGeometry&, const T*, T*);

NOKSHA_INSTANTIATE_KERNELS(float)
NOKSHA_INSTANTIATE_KERNELS(double)

#undef NOKSHA_INSTANTIATE_KERNELS

}  // namespace noksha::nn::kernels
