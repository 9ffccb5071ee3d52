#include "reactnet/bitkernel.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "reactnet/instrument.hpp"

namespace reactnet {

std::vector<double> compute_scale(const FloatTensor& w) {
    if (w.shape.size() != 4) throw std::invalid_argument("compute_scale: weights must be OIHW");
    const int64_t out_ch = w.shape[0];
    const int64_t n = w.shape[1] * w.shape[2] * w.shape[3];
    std::vector<double> scale(static_cast<size_t>(out_ch));
    for (int64_t o = 0; o < out_ch; ++o) {
        double s = 0.0;
        for (int64_t j = 0; j < n; ++j) s += std::abs(w.data[static_cast<size_t>(o * n + j)]);
        scale[static_cast<size_t>(o)] = s / static_cast<double>(n);
    }
    return scale;
}

BinaryConvParams BinaryConvParams::from_real(const FloatTensor& w) {
    BinaryConvParams p;
    p.scale = compute_scale(w);
    const int64_t out_ch = w.shape[0];
    const int64_t n = w.shape[1] * w.shape[2] * w.shape[3];
    p.packed_weights = BitMatrix(out_ch, n);
    for (int64_t o = 0; o < out_ch; ++o)
        for (int64_t j = 0; j < n; ++j)
            if (w.data[static_cast<size_t>(o * n + j)] > 0.0) p.packed_weights.set(o, j, true);
    p.real_weights = w;
    return p;
}

int64_t xnor_popcount_dot(std::span<const uint64_t> a, std::span<const uint64_t> b,
                          int64_t nbits) {
    if (a.size() != b.size())
        throw std::invalid_argument("xnor_popcount_dot: word count mismatch");
    const size_t nw = a.size();
    if (nw * 64 < static_cast<size_t>(nbits))
        throw std::invalid_argument("xnor_popcount_dot: length exceeds word storage");
    int64_t agree = 0;
    const int tail = static_cast<int>(nbits & 63);
    for (size_t i = 0; i < nw; ++i) {
        uint64_t x = ~(a[i] ^ b[i]);
        if (tail != 0 && i + 1 == nw) x &= (uint64_t{1} << tail) - 1;
        agree += std::popcount(x);
    }
    instrument::add_bops(nbits);
    return 2 * agree - nbits;
}

int64_t xnor_popcount_dot(const BitTensor& a, const BitTensor& b) {
    if (a.numel() != b.numel())
        throw std::invalid_argument("xnor_popcount_dot: length mismatch");
    return xnor_popcount_dot(std::span<const uint64_t>(a.words),
                             std::span<const uint64_t>(b.words), a.numel());
}

ConvGeom conv_geometry(const std::vector<int64_t>& s, int64_t k_h, int64_t k_w,
                       int64_t stride, int64_t padding) {
    if (s.size() != 4) throw std::invalid_argument("conv: input must be NCHW");
    if (stride < 1 || padding < 0) throw std::invalid_argument("conv: bad stride/padding");
    ConvGeom g{s[0], s[1], s[2], s[3], k_h, k_w, stride, padding, 0, 0};
    g.out_h = (g.in_h + 2 * padding - k_h) / stride + 1;
    g.out_w = (g.in_w + 2 * padding - k_w) / stride + 1;
    if (g.in_h + 2 * padding < k_h || g.in_w + 2 * padding < k_w || g.out_h < 1 || g.out_w < 1)
        throw std::invalid_argument("conv: zero-size output for input " + shape_str(s));
    return g;
}

BitMatrix im2col(const BitTensor& x, int64_t k_h, int64_t k_w, int64_t stride,
                 int64_t padding) {
    const ConvGeom g = conv_geometry(x.shape, k_h, k_w, stride, padding);
    const int64_t patch = g.in_ch * k_h * k_w;
    BitMatrix m(g.batch * g.out_h * g.out_w, patch);
    const int64_t plane = g.in_h * g.in_w;
    int64_t r = 0;
    for (int64_t n = 0; n < g.batch; ++n)
        for (int64_t oh = 0; oh < g.out_h; ++oh)
            for (int64_t ow = 0; ow < g.out_w; ++ow, ++r) {
                const int64_t h0 = oh * stride - padding;
                const int64_t w0 = ow * stride - padding;
                int64_t col = 0;
                for (int64_t c = 0; c < g.in_ch; ++c) {
                    const int64_t base = (n * g.in_ch + c) * plane;
                    for (int64_t kh = 0; kh < k_h; ++kh) {
                        const int64_t h = h0 + kh;
                        for (int64_t kw = 0; kw < k_w; ++kw, ++col) {
                            const int64_t w = w0 + kw;
                            if (h >= 0 && h < g.in_h && w >= 0 && w < g.in_w &&
                                x.get(base + h * g.in_w + w))
                                m.set(r, col, true);
                            // out-of-bounds stays 0, i.e. a -1 pad element
                        }
                    }
                }
            }
    return m;
}

FloatTensor binary_conv2d(const BitTensor& x, const BinaryConvParams& w, int64_t stride,
                          int64_t padding) {
    const int64_t out_ch = w.packed_weights.rows;
    const int64_t patch = w.packed_weights.cols;
    const ConvGeom g = conv_geometry(x.shape, w.real_weights.shape[2], w.real_weights.shape[3],
                                     stride, padding);
    if (g.in_ch != w.real_weights.shape[1])
        throw std::invalid_argument("binary_conv2d: channel mismatch");
    const BitMatrix cols = im2col(x, g.k_h, g.k_w, stride, padding);
    FloatTensor out({g.batch, out_ch, g.out_h, g.out_w});
    const int64_t positions = g.out_h * g.out_w;
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t n = 0; n < g.batch; ++n)
        for (int64_t o = 0; o < out_ch; ++o) {
            const double s = w.scale[static_cast<size_t>(o)];
            const auto wrow = w.packed_weights.row(o);
            double* dst = out.data.data() + (n * out_ch + o) * positions;
            for (int64_t p = 0; p < positions; ++p) {
                const int64_t dot =
                    xnor_popcount_dot(cols.row(n * positions + p), wrow, patch);
                dst[p] = s * static_cast<double>(dot);
            }
        }
    return out;
}

}  // namespace reactnet
