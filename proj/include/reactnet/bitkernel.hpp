#pragma once

#include <span>
#include <vector>

#include "reactnet/tensor.hpp"

namespace reactnet {

// Per-output-channel scale: mean |w| over each OIHW filter.
std::vector<double> compute_scale(const FloatTensor& w_oihw);

// Binarized conv weights: latent real weights, their packed signs, and the
// per-filter scale. sign(0) binarizes to -1.
struct BinaryConvParams {
    FloatTensor real_weights;  // OIHW, kept for training
    BitMatrix packed_weights;  // one row per output filter, cols = I*kH*kW
    std::vector<double> scale;

    static BinaryConvParams from_real(const FloatTensor& w_oihw);
};

// Exact +-1 dot product of two bit rows of logical length nbits:
// 2*popcount(XNOR) - n, with the tail word masked.
int64_t xnor_popcount_dot(std::span<const uint64_t> a, std::span<const uint64_t> b,
                          int64_t nbits);

// Row-of-BitMatrix convenience used by tests; both rows must share lengths.
int64_t xnor_popcount_dot(const BitTensor& a, const BitTensor& b);

struct ConvGeom {
    int64_t batch, in_ch, in_h, in_w;
    int64_t k_h, k_w, stride, padding;
    int64_t out_h, out_w;
};
ConvGeom conv_geometry(const std::vector<int64_t>& x_shape, int64_t k_h, int64_t k_w,
                       int64_t stride, int64_t padding);

// Bit-level im2col: row r is the packed receptive field of output position r
// (positions ordered n, oh, ow; patch elements ordered c, kh, kw). Padding
// elements are -1, i.e. 0 bits.
BitMatrix im2col(const BitTensor& x_nchw, int64_t k_h, int64_t k_w, int64_t stride,
                 int64_t padding);

// 1-bit convolution: integer XNOR+popcount accumulation, scale applied once.
// Border padding is -1 (the only representable "neutral" choice in {-1,+1});
// any float oracle must pad with -1 as well.
FloatTensor binary_conv2d(const BitTensor& x_nchw, const BinaryConvParams& w,
                          int64_t stride, int64_t padding);

}  // namespace reactnet
