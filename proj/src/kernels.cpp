#include "afos/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace afos::kernels {

namespace {

using std::size_t;
using Index = std::ptrdiff_t;  // OpenMP loop counters must be signed

inline bool beats(double v, double best) { return v > best || (std::isnan(v) && !std::isnan(best)); }

}  // namespace

// ---------------------------------------------------------------------------
// Reference loops

namespace serial {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, size_t m, size_t k, size_t n) {
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
            c[i * n + j] = s;
        }
}

void matmul_at_b(std::span<const double> a, std::span<const double> b, std::span<double> c, size_t m, size_t k,
                 size_t n) {
    for (size_t p = 0; p < k; ++p)
        for (size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (size_t i = 0; i < m; ++i) s += a[i * k + p] * b[i * n + j];
            c[p * n + j] = s;
        }
}

void matmul_a_bt(std::span<const double> a, std::span<const double> b, std::span<double> c, size_t m, size_t n,
                 size_t k) {
    for (size_t i = 0; i < m; ++i)
        for (size_t p = 0; p < k; ++p) {
            double s = 0.0;
            for (size_t j = 0; j < n; ++j) s += a[i * n + j] * b[p * n + j];
            c[i * k + p] = s;
        }
}

void add_row_bias(std::span<double> c, std::span<const double> bias, size_t m, size_t n) {
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) c[i * n + j] += bias[j];
}

void column_sums(std::span<const double> a, std::span<double> out, size_t m, size_t n) {
    for (size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (size_t i = 0; i < m; ++i) s += a[i * n + j];
        out[j] = s;
    }
}

void activate(const funcdsl::Expr& f, std::span<const double> pre, std::span<double> out, std::span<double> slope) {
    for (size_t i = 0; i < pre.size(); ++i) {
        if (slope.empty()) {
            out[i] = funcdsl::value(f, pre[i]);
        } else {
            const auto r = funcdsl::eval(f, pre[i]);
            out[i] = r.value;
            slope[i] = r.derivative;
        }
    }
}

void im2col3x3(std::span<const double> in, ImageDims d, std::span<double> cols) {
    const size_t width = 9 * d.c;
    for (size_t img = 0; img < d.n; ++img)
        for (size_t y = 0; y < d.h; ++y)
            for (size_t x = 0; x < d.w; ++x) {
                const size_t row = (img * d.h + y) * d.w + x;
                for (size_t ky = 0; ky < 3; ++ky)
                    for (size_t kx = 0; kx < 3; ++kx) {
                        const auto sy = static_cast<std::int64_t>(y + ky) - 1;
                        const auto sx = static_cast<std::int64_t>(x + kx) - 1;
                        const bool inside = sy >= 0 && sx >= 0 && sy < static_cast<std::int64_t>(d.h) &&
                                            sx < static_cast<std::int64_t>(d.w);
                        for (size_t ch = 0; ch < d.c; ++ch) {
                            const size_t col = (ky * 3 + kx) * d.c + ch;
                            cols[row * width + col] =
                                inside ? in[((img * d.h + static_cast<size_t>(sy)) * d.w + static_cast<size_t>(sx)) * d.c + ch]
                                       : 0.0;
                        }
                    }
            }
}

void col2im3x3(std::span<const double> cols, ImageDims d, std::span<double> in_grad) {
    const size_t width = 9 * d.c;
    std::fill(in_grad.begin(), in_grad.begin() + static_cast<Index>(d.size()), 0.0);
    for (size_t img = 0; img < d.n; ++img)
        for (size_t y = 0; y < d.h; ++y)
            for (size_t x = 0; x < d.w; ++x) {
                const size_t row = (img * d.h + y) * d.w + x;
                for (size_t ky = 0; ky < 3; ++ky)
                    for (size_t kx = 0; kx < 3; ++kx) {
                        const auto sy = static_cast<std::int64_t>(y + ky) - 1;
                        const auto sx = static_cast<std::int64_t>(x + kx) - 1;
                        if (sy < 0 || sx < 0 || sy >= static_cast<std::int64_t>(d.h) ||
                            sx >= static_cast<std::int64_t>(d.w))
                            continue;
                        for (size_t ch = 0; ch < d.c; ++ch)
                            in_grad[((img * d.h + static_cast<size_t>(sy)) * d.w + static_cast<size_t>(sx)) * d.c + ch] +=
                                cols[row * width + (ky * 3 + kx) * d.c + ch];
                    }
            }
}

void maxpool2x2(std::span<const double> in, ImageDims d, std::span<double> out, std::span<size_t> argmax) {
    const size_t oh = d.h / 2, ow = d.w / 2;
    for (size_t img = 0; img < d.n; ++img)
        for (size_t y = 0; y < oh; ++y)
            for (size_t x = 0; x < ow; ++x)
                for (size_t ch = 0; ch < d.c; ++ch) {
                    size_t best = ((img * d.h + 2 * y) * d.w + 2 * x) * d.c + ch;
                    for (size_t dy = 0; dy < 2; ++dy)
                        for (size_t dx = 0; dx < 2; ++dx) {
                            const size_t idx = ((img * d.h + 2 * y + dy) * d.w + 2 * x + dx) * d.c + ch;
                            if (beats(in[idx], in[best])) best = idx;
                        }
                    const size_t o = ((img * oh + y) * ow + x) * d.c + ch;
                    out[o] = in[best];
                    argmax[o] = best;
                }
}

void maxpool2x2_backward(std::span<const double> out_grad, std::span<const size_t> argmax, std::span<double> in_grad) {
    std::fill(in_grad.begin(), in_grad.end(), 0.0);
    for (size_t o = 0; o < out_grad.size(); ++o) in_grad[argmax[o]] += out_grad[o];
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP versions: outer loops split across threads, inner accumulation
// order per output element matches the reference.

namespace parallel {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, size_t m, size_t k, size_t n) {
#pragma omp parallel for schedule(static)
    for (Index ii = 0; ii < static_cast<Index>(m); ++ii) {
        const auto i = static_cast<size_t>(ii);
        double* crow = c.data() + i * n;
        std::fill(crow, crow + n, 0.0);
        for (size_t p = 0; p < k; ++p) {
            const double aip = a[i * k + p];
            const double* brow = b.data() + p * n;
            for (size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

void matmul_at_b(std::span<const double> a, std::span<const double> b, std::span<double> c, size_t m, size_t k,
                 size_t n) {
#pragma omp parallel for schedule(static)
    for (Index pp = 0; pp < static_cast<Index>(k); ++pp) {
        const auto p = static_cast<size_t>(pp);
        double* crow = c.data() + p * n;
        std::fill(crow, crow + n, 0.0);
        for (size_t i = 0; i < m; ++i) {
            const double aip = a[i * k + p];
            const double* brow = b.data() + i * n;
            for (size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

void matmul_a_bt(std::span<const double> a, std::span<const double> b, std::span<double> c, size_t m, size_t n,
                 size_t k) {
#pragma omp parallel for schedule(static)
    for (Index ii = 0; ii < static_cast<Index>(m); ++ii) {
        const auto i = static_cast<size_t>(ii);
        const double* arow = a.data() + i * n;
        for (size_t p = 0; p < k; ++p) {
            const double* brow = b.data() + p * n;
            double s = 0.0;
            for (size_t j = 0; j < n; ++j) s += arow[j] * brow[j];
            c[i * k + p] = s;
        }
    }
}

void add_row_bias(std::span<double> c, std::span<const double> bias, size_t m, size_t n) {
#pragma omp parallel for schedule(static)
    for (Index ii = 0; ii < static_cast<Index>(m); ++ii) {
        double* row = c.data() + static_cast<size_t>(ii) * n;
        for (size_t j = 0; j < n; ++j) row[j] += bias[j];
    }
}

void column_sums(std::span<const double> a, std::span<double> out, size_t m, size_t n) {
#pragma omp parallel for schedule(static)
    for (Index jj = 0; jj < static_cast<Index>(n); ++jj) {
        const auto j = static_cast<size_t>(jj);
        double s = 0.0;
        for (size_t i = 0; i < m; ++i) s += a[i * n + j];
        out[j] = s;
    }
}

void activate(const funcdsl::Expr& f, std::span<const double> pre, std::span<double> out, std::span<double> slope) {
    const auto count = static_cast<Index>(pre.size());
    if (slope.empty()) {
#pragma omp parallel for schedule(static)
        for (Index i = 0; i < count; ++i) out[static_cast<size_t>(i)] = funcdsl::value(f, pre[static_cast<size_t>(i)]);
        return;
    }
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < count; ++i) {
        const auto r = funcdsl::eval(f, pre[static_cast<size_t>(i)]);
        out[static_cast<size_t>(i)] = r.value;
        slope[static_cast<size_t>(i)] = r.derivative;
    }
}

void im2col3x3(std::span<const double> in, ImageDims d, std::span<double> cols) {
#pragma omp parallel for schedule(static)
    for (Index img = 0; img < static_cast<Index>(d.n); ++img)
        serial::im2col3x3(in.subspan(static_cast<size_t>(img) * d.h * d.w * d.c, d.h * d.w * d.c),
                          {1, d.h, d.w, d.c}, cols.subspan(static_cast<size_t>(img) * d.h * d.w * 9 * d.c, d.h * d.w * 9 * d.c));
}

void col2im3x3(std::span<const double> cols, ImageDims d, std::span<double> in_grad) {
#pragma omp parallel for schedule(static)
    for (Index img = 0; img < static_cast<Index>(d.n); ++img)
        serial::col2im3x3(cols.subspan(static_cast<size_t>(img) * d.h * d.w * 9 * d.c, d.h * d.w * 9 * d.c),
                          {1, d.h, d.w, d.c}, in_grad.subspan(static_cast<size_t>(img) * d.h * d.w * d.c, d.h * d.w * d.c));
}

void maxpool2x2(std::span<const double> in, ImageDims d, std::span<double> out, std::span<size_t> argmax) {
    const size_t in_stride = d.h * d.w * d.c;
    const size_t out_stride = (d.h / 2) * (d.w / 2) * d.c;
#pragma omp parallel for schedule(static)
    for (Index img = 0; img < static_cast<Index>(d.n); ++img) {
        const auto k = static_cast<size_t>(img);
        auto local = argmax.subspan(k * out_stride, out_stride);
        serial::maxpool2x2(in.subspan(k * in_stride, in_stride), {1, d.h, d.w, d.c}, out.subspan(k * out_stride, out_stride),
                           local);
        for (auto& idx : local) idx += k * in_stride;
    }
}

void maxpool2x2_backward(std::span<const double> out_grad, std::span<const size_t> argmax, std::span<double> in_grad) {
    // Pool windows do not overlap, so every input receives at most one write.
    std::fill(in_grad.begin(), in_grad.end(), 0.0);
#pragma omp parallel for schedule(static)
    for (Index o = 0; o < static_cast<Index>(out_grad.size()); ++o)
        in_grad[argmax[static_cast<size_t>(o)]] += out_grad[static_cast<size_t>(o)];
}

}  // namespace parallel

}  // namespace afos::kernels
