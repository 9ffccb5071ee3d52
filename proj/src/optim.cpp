#include "reactnet/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reactnet {

void AdamOptimizer::step(std::vector<ParamRef>& params, double lr, double weight_decay) {
    if (m.empty()) {
        m.resize(params.size());
        v.resize(params.size());
        for (size_t i = 0; i < params.size(); ++i) {
            m[i].assign(params[i].value->size(), 0.0);
            v[i].assign(params[i].value->size(), 0.0);
        }
    }
    if (m.size() != params.size())
        throw std::invalid_argument("AdamOptimizer: parameter set changed size");
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (size_t i = 0; i < params.size(); ++i) {
        ParamRef& p = params[i];
        if (p.value->size() != p.grad->size() || p.value->size() != m[i].size())
            throw std::invalid_argument("AdamOptimizer: shape mismatch for " + p.name);
        for (size_t j = 0; j < p.value->size(); ++j) {
            double g = (*p.grad)[j];
            if (p.weight_decay && weight_decay != 0.0) g += weight_decay * (*p.value)[j];
            m[i][j] = beta1 * m[i][j] + (1.0 - beta1) * g;
            v[i][j] = beta2 * v[i][j] + (1.0 - beta2) * g * g;
            const double mhat = m[i][j] / bc1;
            const double vhat = v[i][j] / bc2;
            (*p.value)[j] -= lr * mhat / (std::sqrt(vhat) + epsilon);
            if (p.clip_latent)
                (*p.value)[j] = std::clamp((*p.value)[j], clip_lo, clip_hi);
        }
    }
}

}  // namespace reactnet
