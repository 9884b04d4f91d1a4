#pragma once

// Numeric kernels behind the network layers.
//
// `serial` holds the plain reference loops; `parallel` holds the OpenMP
// versions. Both accumulate every output element in the same order, so
// their results are bit-identical and the reference doubles as an oracle.
// All matrices are row-major.

#include <cstddef>
#include <span>

#include "afos/funcdsl.hpp"

namespace afos::kernels {

enum class Backend { serial, parallel };

// Geometry of a batch of NHWC images for the 3x3 same-padded convolution
// and the 2x2 max-pool.
struct ImageDims {
    std::size_t n = 0, h = 0, w = 0, c = 0;
    std::size_t pixels() const noexcept { return n * h * w; }
    std::size_t size() const noexcept { return n * h * w * c; }
};

#define AFOS_KERNEL_DECLS                                                                                      \
    /* c[m x n] = a[m x k] * b[k x n] */                                                                       \
    void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,     \
                std::size_t k, std::size_t n);                                                                 \
    /* c[k x n] = a[m x k]^T * b[m x n] */                                                                     \
    void matmul_at_b(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m, \
                     std::size_t k, std::size_t n);                                                            \
    /* c[m x k] = a[m x n] * b[k x n]^T */                                                                     \
    void matmul_a_bt(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m, \
                     std::size_t n, std::size_t k);                                                            \
    void add_row_bias(std::span<double> c, std::span<const double> bias, std::size_t m, std::size_t n);        \
    void column_sums(std::span<const double> a, std::span<double> out, std::size_t m, std::size_t n);         \
    /* out[i] = f(pre[i]); slope[i] = f'(pre[i]) unless slope is empty */                                      \
    void activate(const funcdsl::Expr& f, std::span<const double> pre, std::span<double> out,                 \
                  std::span<double> slope);                                                                    \
    void im2col3x3(std::span<const double> in, ImageDims d, std::span<double> cols);                          \
    void col2im3x3(std::span<const double> cols, ImageDims d, std::span<double> in_grad);                     \
    /* argmax holds the flat input index chosen for each output element */                                     \
    void maxpool2x2(std::span<const double> in, ImageDims d, std::span<double> out,                           \
                    std::span<std::size_t> argmax);                                                            \
    void maxpool2x2_backward(std::span<const double> out_grad, std::span<const std::size_t> argmax,          \
                             std::span<double> in_grad);

namespace serial {
AFOS_KERNEL_DECLS
}  // namespace serial

namespace parallel {
AFOS_KERNEL_DECLS
}  // namespace parallel

#undef AFOS_KERNEL_DECLS

}  // namespace afos::kernels
