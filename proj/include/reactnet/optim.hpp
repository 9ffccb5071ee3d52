#pragma once

#include <vector>

#include "reactnet/arch.hpp"

namespace reactnet {

// Adam with L2 decay added to the gradient. Decay touches only parameters
// flagged weight_decay (latent/real conv and FC weights); latent binary
// weights are clipped to [-1.05, 1.05] after the update so the
// straight-through window stays active.
struct AdamOptimizer {
    double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
    double clip_lo = -1.05, clip_hi = 1.05;
    int64_t t = 0;
    std::vector<std::vector<double>> m, v;

    void step(std::vector<ParamRef>& params, double lr, double weight_decay);
};

// lr(t) = initial_lr * (1 - t / total), exact.
inline double linear_decay_lr(double initial_lr, int64_t step, int64_t total_steps) {
    return initial_lr * (1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
}

}  // namespace reactnet
