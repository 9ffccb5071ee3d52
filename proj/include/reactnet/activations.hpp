#pragma once

#include <vector>

#include "reactnet/tensor.hpp"

namespace reactnet {

struct RSignParams {
    std::vector<double> alpha;  // per-channel binarization threshold
};

struct RPReLUParams {
    std::vector<double> beta;   // negative-side slope
    std::vector<double> gamma;  // input shift
    std::vector<double> zeta;   // output shift
};

// +1 where x > alpha_c, -1 where x <= alpha_c.
BitTensor rsign_forward(const FloatTensor& x, const RSignParams& p);
// Same decision rule but materialized as a +-1 float tensor (training path).
FloatTensor rsign_forward_pm1(const FloatTensor& x, const RSignParams& p);

struct RSignGrads {
    FloatTensor grad_x;
    std::vector<double> grad_alpha;
};
// grad_alpha is the exact -sum(upstream) per channel; grad_x uses the
// piecewise-polynomial sign surrogate evaluated at u = x - alpha:
// d/du = 2+2u on [-1,0), 2-2u on [0,1), 0 elsewhere.
RSignGrads rsign_backward(const FloatTensor& x, const RSignParams& p,
                          const FloatTensor& upstream);

// Piecewise-polynomial sign surrogate and its derivative (the smooth stand-in
// for gradient checks).
double approx_sign(double u);
double approx_sign_grad(double u);

FloatTensor rprelu_forward(const FloatTensor& x, const RPReLUParams& p);

struct RPReLUGrads {
    FloatTensor grad_x;
    std::vector<double> grad_beta, grad_gamma, grad_zeta;
};
RPReLUGrads rprelu_backward(const FloatTensor& x, const RPReLUParams& p,
                            const FloatTensor& upstream);

// Effective binary weights: scale_o * sign(w), with sign(0) = -1.
FloatTensor binarize_weights(const FloatTensor& w_oihw);

// Straight-through weight gradient: upstream is d Loss / d w_b. The clipped
// STE passes gradient where |w_r| <= 1; the per-filter scale's own dependence
// on every weight of the filter is chained in exactly.
FloatTensor weight_binarize_backward(const FloatTensor& w_oihw,
                                     const FloatTensor& upstream_wrt_wb);

// Smooth surrogate pair used only by finite-difference checks:
// w_b = scale(w) * clip(w, -1, 1) with its exact derivative.
FloatTensor weight_binarize_smooth(const FloatTensor& w_oihw);
FloatTensor weight_binarize_smooth_backward(const FloatTensor& w_oihw,
                                            const FloatTensor& upstream_wrt_wb);

}  // namespace reactnet
