#pragma once

// Dense kernels behind the tensor ops. Single-threaded with a fixed summation order,
// so results are bitwise reproducible.

#include <cstddef>
#include <vector>

namespace noksha::nn::kernels {

/// C[M,N] += A[M,K] * B[K,N]
template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);

/// C[M,N] += A^T * B where A is stored [K,M].
template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);

/// C[M,N] += A * B^T where B is stored [N,K].
template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);

struct ConvGeometry {
  std::size_t channels, height, width;  // image side
  std::size_t kernel, stride, padding;
  std::size_t out_height, out_width;    // patch grid

  std::size_t patch_rows() const { return channels * kernel * kernel; }
  std::size_t patch_cols() const { return out_height * out_width; }
};

/// col[C*k*k, Ho*Wo] from image[C,H,W]; padding reads zero.
template <typename T>
void im2col(const ConvGeometry& g, const T* image, T* col);

/// image[C,H,W] += scatter of col[C*k*k, Ho*Wo].
template <typename T>
void col2im(const ConvGeometry& g, const T* col, T* image);

}  // namespace noksha::nn::kernels
