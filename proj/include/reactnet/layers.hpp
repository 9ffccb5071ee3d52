#pragma once

#include <vector>

#include "reactnet/tensor.hpp"

namespace reactnet {

// ---- Batch normalization -------------------------------------------------

struct BatchNormParams {
    std::vector<double> gamma_bn, beta_bn;
    std::vector<double> running_mean, running_var;
    double momentum = 0.1;
    double epsilon = 1e-5;

    explicit BatchNormParams(int64_t channels)
        : gamma_bn(static_cast<size_t>(channels), 1.0),
          beta_bn(static_cast<size_t>(channels), 0.0),
          running_mean(static_cast<size_t>(channels), 0.0),
          running_var(static_cast<size_t>(channels), 1.0) {}
};

struct BatchNormCache {
    FloatTensor x_hat;            // normalized pre-affine values
    std::vector<double> mean, inv_std;
    bool training = false;
};

// Training mode normalizes with batch statistics (reduction count >= 2 per
// channel required) and updates running stats in place.
FloatTensor batchnorm_forward(const FloatTensor& x, BatchNormParams& p, bool training,
                              BatchNormCache* cache = nullptr);

struct BatchNormGrads {
    FloatTensor grad_x;
    std::vector<double> grad_gamma, grad_beta;
};
BatchNormGrads batchnorm_backward(const BatchNormCache& cache, const BatchNormParams& p,
                                  const FloatTensor& upstream);

// ---- Pooling ---------------------------------------------------------------

FloatTensor avgpool2x2(const FloatTensor& x);
FloatTensor avgpool2x2_backward(const std::vector<int64_t>& in_shape,
                                const FloatTensor& upstream);

// Spatial mean per (n, c); output shape (N, C).
FloatTensor global_avgpool(const FloatTensor& x);
FloatTensor global_avgpool_backward(const std::vector<int64_t>& in_shape,
                                    const FloatTensor& upstream);

// ---- Fully connected -------------------------------------------------------

// x: (N, in), weight: (out, in), bias: (out) -> (N, out)
FloatTensor fc_forward(const FloatTensor& x, const FloatTensor& weight,
                       const std::vector<double>& bias);

struct FcGrads {
    FloatTensor grad_x, grad_weight;
    std::vector<double> grad_bias;
};
FcGrads fc_backward(const FloatTensor& x, const FloatTensor& weight,
                    const FloatTensor& upstream);

// ---- Real-valued convolution ------------------------------------------------

// Dense float im2col: rows = N*OH*OW, cols = C*kH*kW, configurable pad value
// (binary feature maps pad with -1, real ones with 0).
FloatTensor im2col_f(const FloatTensor& x, int64_t k_h, int64_t k_w, int64_t stride,
                     int64_t padding, double pad_value);
FloatTensor col2im_f(const FloatTensor& cols, const std::vector<int64_t>& x_shape,
                     int64_t k_h, int64_t k_w, int64_t stride, int64_t padding);

// Grouped dense convolution; groups must divide both channel counts.
FloatTensor real_conv2d(const FloatTensor& x, const FloatTensor& w_oihw, int64_t stride,
                        int64_t padding, int64_t groups = 1, double pad_value = 0.0);

struct ConvGrads {
    FloatTensor grad_x, grad_w;
};
ConvGrads real_conv2d_backward(const FloatTensor& x, const FloatTensor& w_oihw,
                               const FloatTensor& upstream, int64_t stride,
                               int64_t padding, int64_t groups = 1,
                               double pad_value = 0.0);

// ---- Softmax ----------------------------------------------------------------

// Row-wise stable softmax of (N, K) logits.
FloatTensor softmax(const FloatTensor& logits);

}  // namespace reactnet
