#include "reactnet/activations.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reactnet {

namespace {

// Channel geometry for a rank>=2 tensor with the channel in dim 1.
struct ChanGeom {
    int64_t batch, channels, plane;
};

ChanGeom chan_geom(const FloatTensor& x, size_t param_len, const char* who) {
    if (x.shape.size() < 2)
        throw std::invalid_argument(std::string(who) + ": tensor must have a channel dim");
    ChanGeom g{x.shape[0], x.shape[1], 1};
    for (size_t i = 2; i < x.shape.size(); ++i) g.plane *= x.shape[i];
    if (static_cast<size_t>(g.channels) != param_len)
        throw std::invalid_argument(std::string(who) + ": channel count " +
                                    std::to_string(g.channels) + " != parameter length " +
                                    std::to_string(param_len));
    return g;
}

inline double bin_sign(double v) { return v > 0.0 ? 1.0 : -1.0; }
inline double abs_grad(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

BitTensor rsign_forward(const FloatTensor& x, const RSignParams& p) {
    const ChanGeom g = chan_geom(x, p.alpha.size(), "rsign_forward");
    BitTensor out(x.shape);
    int64_t i = 0;
    for (int64_t n = 0; n < g.batch; ++n)
        for (int64_t c = 0; c < g.channels; ++c) {
            const double a = p.alpha[static_cast<size_t>(c)];
            for (int64_t q = 0; q < g.plane; ++q, ++i)
                if (x.data[static_cast<size_t>(i)] > a) out.set(i, true);
        }
    return out;
}

FloatTensor rsign_forward_pm1(const FloatTensor& x, const RSignParams& p) {
    const ChanGeom g = chan_geom(x, p.alpha.size(), "rsign_forward");
    FloatTensor out(x.shape);
    int64_t i = 0;
    for (int64_t n = 0; n < g.batch; ++n)
        for (int64_t c = 0; c < g.channels; ++c) {
            const double a = p.alpha[static_cast<size_t>(c)];
            for (int64_t q = 0; q < g.plane; ++q, ++i)
                out.data[static_cast<size_t>(i)] = x.data[static_cast<size_t>(i)] > a ? 1.0 : -1.0;
        }
    return out;
}

double approx_sign(double u) {
    if (u <= -1.0) return -1.0;
    if (u >= 1.0) return 1.0;
    return u < 0.0 ? u * u + 2.0 * u : 2.0 * u - u * u;
}

double approx_sign_grad(double u) {
    if (u < -1.0 || u >= 1.0) return 0.0;
    return u < 0.0 ? 2.0 + 2.0 * u : 2.0 - 2.0 * u;
}

RSignGrads rsign_backward(const FloatTensor& x, const RSignParams& p,
                          const FloatTensor& upstream) {
    if (!x.same_shape(upstream))
        throw std::invalid_argument("rsign_backward: upstream shape mismatch");
    const ChanGeom g = chan_geom(x, p.alpha.size(), "rsign_backward");
    RSignGrads out;
    out.grad_x = FloatTensor(x.shape);
    out.grad_alpha.assign(p.alpha.size(), 0.0);
    int64_t i = 0;
    for (int64_t n = 0; n < g.batch; ++n)
        for (int64_t c = 0; c < g.channels; ++c) {
            const double a = p.alpha[static_cast<size_t>(c)];
            double ga = 0.0;
            for (int64_t q = 0; q < g.plane; ++q, ++i) {
                const double up = upstream.data[static_cast<size_t>(i)];
                out.grad_x.data[static_cast<size_t>(i)] =
                    up * approx_sign_grad(x.data[static_cast<size_t>(i)] - a);
                ga -= up;  // dh/dalpha = -1 exactly
            }
            out.grad_alpha[static_cast<size_t>(c)] += ga;
        }
    return out;
}

FloatTensor rprelu_forward(const FloatTensor& x, const RPReLUParams& p) {
    const ChanGeom g = chan_geom(x, p.beta.size(), "rprelu_forward");
    FloatTensor out(x.shape);
    int64_t i = 0;
    for (int64_t n = 0; n < g.batch; ++n)
        for (int64_t c = 0; c < g.channels; ++c) {
            const double b = p.beta[static_cast<size_t>(c)];
            const double gm = p.gamma[static_cast<size_t>(c)];
            const double z = p.zeta[static_cast<size_t>(c)];
            for (int64_t q = 0; q < g.plane; ++q, ++i) {
                const double v = x.data[static_cast<size_t>(i)];
                out.data[static_cast<size_t>(i)] =
                    v > gm ? v - gm + z : b * (v - gm) + z;
            }
        }
    return out;
}

RPReLUGrads rprelu_backward(const FloatTensor& x, const RPReLUParams& p,
                            const FloatTensor& upstream) {
    if (!x.same_shape(upstream))
        throw std::invalid_argument("rprelu_backward: upstream shape mismatch");
    const ChanGeom g = chan_geom(x, p.beta.size(), "rprelu_backward");
    RPReLUGrads out;
    out.grad_x = FloatTensor(x.shape);
    out.grad_beta.assign(p.beta.size(), 0.0);
    out.grad_gamma.assign(p.beta.size(), 0.0);
    out.grad_zeta.assign(p.beta.size(), 0.0);
    int64_t i = 0;
    for (int64_t n = 0; n < g.batch; ++n)
        for (int64_t c = 0; c < g.channels; ++c) {
            const double b = p.beta[static_cast<size_t>(c)];
            const double gm = p.gamma[static_cast<size_t>(c)];
            double gb = 0.0, gg = 0.0, gz = 0.0;
            for (int64_t q = 0; q < g.plane; ++q, ++i) {
                const double v = x.data[static_cast<size_t>(i)];
                const double up = upstream.data[static_cast<size_t>(i)];
                if (v > gm) {
                    out.grad_x.data[static_cast<size_t>(i)] = up;
                    gg -= up;
                } else {
                    out.grad_x.data[static_cast<size_t>(i)] = up * b;
                    gb += up * (v - gm);
                    gg -= up * b;
                }
                gz += up;  // df/dzeta = 1
            }
            out.grad_beta[static_cast<size_t>(c)] += gb;
            out.grad_gamma[static_cast<size_t>(c)] += gg;
            out.grad_zeta[static_cast<size_t>(c)] += gz;
        }
    return out;
}

}  // namespace reactnet

#include "reactnet/bitkernel.hpp"

namespace reactnet {

namespace {
struct FilterGeom {
    int64_t out_ch, n;
};
FilterGeom filter_geom(const FloatTensor& w) {
    if (w.shape.size() != 4)
        throw std::invalid_argument("weight binarization: weights must be OIHW");
    return {w.shape[0], w.shape[1] * w.shape[2] * w.shape[3]};
}
}  // namespace

FloatTensor binarize_weights(const FloatTensor& w) {
    const FilterGeom g = filter_geom(w);
    const std::vector<double> scale = compute_scale(w);
    FloatTensor out(w.shape);
    for (int64_t o = 0; o < g.out_ch; ++o)
        for (int64_t j = 0; j < g.n; ++j)
            out.data[static_cast<size_t>(o * g.n + j)] =
                scale[static_cast<size_t>(o)] *
                bin_sign(w.data[static_cast<size_t>(o * g.n + j)]);
    return out;
}

FloatTensor weight_binarize_backward(const FloatTensor& w, const FloatTensor& upstream) {
    if (!w.same_shape(upstream))
        throw std::invalid_argument("weight_binarize_backward: shape mismatch");
    const FilterGeom g = filter_geom(w);
    const std::vector<double> scale = compute_scale(w);
    FloatTensor grad(w.shape);
    for (int64_t o = 0; o < g.out_ch; ++o) {
        const double* wf = w.data.data() + o * g.n;
        const double* gf = upstream.data.data() + o * g.n;
        double dot = 0.0;  // sum_j g_j * sign(w_j), feeds the scale chain
        for (int64_t j = 0; j < g.n; ++j) dot += gf[j] * bin_sign(wf[j]);
        const double s = scale[static_cast<size_t>(o)];
        double* out = grad.data.data() + o * g.n;
        for (int64_t k = 0; k < g.n; ++k) {
            double v = abs_grad(wf[k]) / static_cast<double>(g.n) * dot;
            if (std::abs(wf[k]) <= 1.0) v += gf[k] * s;
            out[k] = v;
        }
    }
    return grad;
}

FloatTensor weight_binarize_smooth(const FloatTensor& w) {
    const FilterGeom g = filter_geom(w);
    const std::vector<double> scale = compute_scale(w);
    FloatTensor out(w.shape);
    for (int64_t o = 0; o < g.out_ch; ++o)
        for (int64_t j = 0; j < g.n; ++j) {
            const double v = w.data[static_cast<size_t>(o * g.n + j)];
            out.data[static_cast<size_t>(o * g.n + j)] =
                scale[static_cast<size_t>(o)] * std::clamp(v, -1.0, 1.0);
        }
    return out;
}

FloatTensor weight_binarize_smooth_backward(const FloatTensor& w, const FloatTensor& upstream) {
    if (!w.same_shape(upstream))
        throw std::invalid_argument("weight_binarize_smooth_backward: shape mismatch");
    const FilterGeom g = filter_geom(w);
    const std::vector<double> scale = compute_scale(w);
    FloatTensor grad(w.shape);
    for (int64_t o = 0; o < g.out_ch; ++o) {
        const double* wf = w.data.data() + o * g.n;
        const double* gf = upstream.data.data() + o * g.n;
        double dot = 0.0;
        for (int64_t j = 0; j < g.n; ++j) dot += gf[j] * std::clamp(wf[j], -1.0, 1.0);
        const double s = scale[static_cast<size_t>(o)];
        double* out = grad.data.data() + o * g.n;
        for (int64_t k = 0; k < g.n; ++k) {
            double v = abs_grad(wf[k]) / static_cast<double>(g.n) * dot;
            if (std::abs(wf[k]) <= 1.0) v += gf[k] * s;
            out[k] = v;
        }
    }
    return grad;
}

}  // namespace reactnet
