#include "reactnet/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <cblas.h>

#include "reactnet/bitkernel.hpp"
#include "reactnet/instrument.hpp"

namespace reactnet {

namespace {

// C (rows x n) = A (rows x k) * B^T, B is (n x k). Rows are contiguous on both
// sides so the inner loop is a plain dot product.
std::vector<double> matmul_abT(const double* a, int64_t rows, int64_t k, const double* b,
                               int64_t n) {
    std::vector<double> c(static_cast<size_t>(rows * n), 0.0);
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, static_cast<int>(rows),
                static_cast<int>(n), static_cast<int>(k), 1.0, a, static_cast<int>(k), b,
                static_cast<int>(k), 0.0, c.data(), static_cast<int>(n));
    return c;
}

// C (rows x n) = A (rows x k) * B, B is (k x n).
std::vector<double> matmul_ab(const double* a, int64_t rows, int64_t k, const double* b,
                              int64_t n) {
    std::vector<double> c(static_cast<size_t>(rows * n), 0.0);
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(rows),
                static_cast<int>(n), static_cast<int>(k), 1.0, a, static_cast<int>(k), b,
                static_cast<int>(n), 0.0, c.data(), static_cast<int>(n));
    return c;
}

FloatTensor channel_slice(const FloatTensor& x, int64_t c0, int64_t c1) {
    const int64_t n = x.shape[0], c = x.shape[1], plane = x.shape[2] * x.shape[3];
    FloatTensor out({n, c1 - c0, x.shape[2], x.shape[3]});
    for (int64_t i = 0; i < n; ++i)
        std::copy(x.data.begin() + (i * c + c0) * plane, x.data.begin() + (i * c + c1) * plane,
                  out.data.begin() + i * (c1 - c0) * plane);
    return out;
}

}  // namespace

// ---- Batch normalization ---------------------------------------------------

FloatTensor batchnorm_forward(const FloatTensor& x, BatchNormParams& p, bool training,
                              BatchNormCache* cache) {
    if (x.shape.size() != 4 && x.shape.size() != 2)
        throw std::invalid_argument("batchnorm: rank must be 2 or 4");
    const int64_t n = x.shape[0], c = x.shape[1];
    const int64_t plane = x.shape.size() == 4 ? x.shape[2] * x.shape[3] : 1;
    if (static_cast<size_t>(c) != p.gamma_bn.size())
        throw std::invalid_argument("batchnorm: channel mismatch");
    const int64_t m = n * plane;
    if (training && m < 2)
        throw std::invalid_argument("batchnorm: training mode needs >= 2 values per channel");

    std::vector<double> mean(static_cast<size_t>(c)), var(static_cast<size_t>(c));
    if (training) {
        for (int64_t ch = 0; ch < c; ++ch) {
            double s = 0.0;
            for (int64_t i = 0; i < n; ++i) {
                const double* px = x.data.data() + (i * c + ch) * plane;
                for (int64_t q = 0; q < plane; ++q) s += px[q];
            }
            const double mu = s / static_cast<double>(m);
            double v = 0.0;
            for (int64_t i = 0; i < n; ++i) {
                const double* px = x.data.data() + (i * c + ch) * plane;
                for (int64_t q = 0; q < plane; ++q) v += (px[q] - mu) * (px[q] - mu);
            }
            v /= static_cast<double>(m);  // biased variance, standard for BN
            mean[static_cast<size_t>(ch)] = mu;
            var[static_cast<size_t>(ch)] = v;
            p.running_mean[static_cast<size_t>(ch)] =
                (1.0 - p.momentum) * p.running_mean[static_cast<size_t>(ch)] + p.momentum * mu;
            p.running_var[static_cast<size_t>(ch)] =
                (1.0 - p.momentum) * p.running_var[static_cast<size_t>(ch)] + p.momentum * v;
        }
    } else {
        mean = p.running_mean;
        var = p.running_var;
    }

    FloatTensor out(x.shape);
    std::vector<double> inv_std(static_cast<size_t>(c));
    for (int64_t ch = 0; ch < c; ++ch)
        inv_std[static_cast<size_t>(ch)] =
            1.0 / std::sqrt(var[static_cast<size_t>(ch)] + p.epsilon);
    FloatTensor x_hat(x.shape);
    for (int64_t i = 0; i < n; ++i)
        for (int64_t ch = 0; ch < c; ++ch) {
            const double mu = mean[static_cast<size_t>(ch)];
            const double is = inv_std[static_cast<size_t>(ch)];
            const double g = p.gamma_bn[static_cast<size_t>(ch)];
            const double b = p.beta_bn[static_cast<size_t>(ch)];
            const double* px = x.data.data() + (i * c + ch) * plane;
            double* ph = x_hat.data.data() + (i * c + ch) * plane;
            double* po = out.data.data() + (i * c + ch) * plane;
            for (int64_t q = 0; q < plane; ++q) {
                ph[q] = (px[q] - mu) * is;
                po[q] = g * ph[q] + b;
            }
        }
    if (cache) {
        cache->x_hat = std::move(x_hat);
        cache->mean = std::move(mean);
        cache->inv_std = std::move(inv_std);
        cache->training = training;
    }
    return out;
}

BatchNormGrads batchnorm_backward(const BatchNormCache& cache, const BatchNormParams& p,
                                  const FloatTensor& upstream) {
    const FloatTensor& xh = cache.x_hat;
    if (!xh.same_shape(upstream))
        throw std::invalid_argument("batchnorm_backward: shape mismatch");
    const int64_t n = xh.shape[0], c = xh.shape[1];
    const int64_t plane = xh.shape.size() == 4 ? xh.shape[2] * xh.shape[3] : 1;
    const double m = static_cast<double>(n * plane);

    BatchNormGrads out;
    out.grad_x = FloatTensor(xh.shape);
    out.grad_gamma.assign(static_cast<size_t>(c), 0.0);
    out.grad_beta.assign(static_cast<size_t>(c), 0.0);
    for (int64_t ch = 0; ch < c; ++ch) {
        double sum_g = 0.0, sum_gx = 0.0;
        for (int64_t i = 0; i < n; ++i) {
            const double* pg = upstream.data.data() + (i * c + ch) * plane;
            const double* ph = xh.data.data() + (i * c + ch) * plane;
            for (int64_t q = 0; q < plane; ++q) {
                sum_g += pg[q];
                sum_gx += pg[q] * ph[q];
            }
        }
        out.grad_beta[static_cast<size_t>(ch)] = sum_g;
        out.grad_gamma[static_cast<size_t>(ch)] = sum_gx;
        const double g = p.gamma_bn[static_cast<size_t>(ch)];
        const double is = cache.inv_std[static_cast<size_t>(ch)];
        for (int64_t i = 0; i < n; ++i) {
            const double* pg = upstream.data.data() + (i * c + ch) * plane;
            const double* ph = xh.data.data() + (i * c + ch) * plane;
            double* po = out.grad_x.data.data() + (i * c + ch) * plane;
            if (cache.training) {
                for (int64_t q = 0; q < plane; ++q)
                    po[q] = g * is / m * (m * pg[q] - sum_g - ph[q] * sum_gx);
            } else {
                for (int64_t q = 0; q < plane; ++q) po[q] = g * is * pg[q];
            }
        }
    }
    return out;
}

// ---- Pooling -----------------------------------------------------------------

FloatTensor avgpool2x2(const FloatTensor& x) {
    if (x.shape.size() != 4) throw std::invalid_argument("avgpool2x2: NCHW expected");
    const int64_t n = x.shape[0], c = x.shape[1], h = x.shape[2], w = x.shape[3];
    const int64_t oh = (h + 1) / 2, ow = (w + 1) / 2;
    FloatTensor out({n, c, oh, ow});
    for (int64_t i = 0; i < n; ++i)
        for (int64_t ch = 0; ch < c; ++ch)
            for (int64_t y = 0; y < oh; ++y)
                for (int64_t z = 0; z < ow; ++z) {
                    // odd edges replicate the last row/column
                    const int64_t h0 = 2 * y, h1 = std::min(2 * y + 1, h - 1);
                    const int64_t w0 = 2 * z, w1 = std::min(2 * z + 1, w - 1);
                    out.at(i, ch, y, z) = 0.25 * (x.at(i, ch, h0, w0) + x.at(i, ch, h0, w1) +
                                                  x.at(i, ch, h1, w0) + x.at(i, ch, h1, w1));
                }
    return out;
}

FloatTensor avgpool2x2_backward(const std::vector<int64_t>& in_shape,
                                const FloatTensor& upstream) {
    const int64_t n = in_shape[0], c = in_shape[1], h = in_shape[2], w = in_shape[3];
    FloatTensor gx(in_shape);
    const int64_t oh = upstream.shape[2], ow = upstream.shape[3];
    for (int64_t i = 0; i < n; ++i)
        for (int64_t ch = 0; ch < c; ++ch)
            for (int64_t y = 0; y < oh; ++y)
                for (int64_t z = 0; z < ow; ++z) {
                    const double g = 0.25 * upstream.at(i, ch, y, z);
                    const int64_t h0 = 2 * y, h1 = std::min(2 * y + 1, h - 1);
                    const int64_t w0 = 2 * z, w1 = std::min(2 * z + 1, w - 1);
                    gx.at(i, ch, h0, w0) += g;
                    gx.at(i, ch, h0, w1) += g;
                    gx.at(i, ch, h1, w0) += g;
                    gx.at(i, ch, h1, w1) += g;
                }
    return gx;
}

FloatTensor global_avgpool(const FloatTensor& x) {
    if (x.shape.size() != 4) throw std::invalid_argument("global_avgpool: NCHW expected");
    const int64_t n = x.shape[0], c = x.shape[1], plane = x.shape[2] * x.shape[3];
    FloatTensor out({n, c});
    for (int64_t i = 0; i < n; ++i)
        for (int64_t ch = 0; ch < c; ++ch) {
            const double* px = x.data.data() + (i * c + ch) * plane;
            double s = 0.0;
            for (int64_t q = 0; q < plane; ++q) s += px[q];
            out.data[static_cast<size_t>(i * c + ch)] = s / static_cast<double>(plane);
        }
    return out;
}

FloatTensor global_avgpool_backward(const std::vector<int64_t>& in_shape,
                                    const FloatTensor& upstream) {
    const int64_t n = in_shape[0], c = in_shape[1], plane = in_shape[2] * in_shape[3];
    FloatTensor gx(in_shape);
    for (int64_t i = 0; i < n; ++i)
        for (int64_t ch = 0; ch < c; ++ch) {
            const double g =
                upstream.data[static_cast<size_t>(i * c + ch)] / static_cast<double>(plane);
            double* px = gx.data.data() + (i * c + ch) * plane;
            for (int64_t q = 0; q < plane; ++q) px[q] = g;
        }
    return gx;
}

// ---- Fully connected -----------------------------------------------------------

FloatTensor fc_forward(const FloatTensor& x, const FloatTensor& weight,
                       const std::vector<double>& bias) {
    if (x.shape.size() != 2 || weight.shape.size() != 2 || x.shape[1] != weight.shape[1])
        throw std::invalid_argument("fc_forward: shape mismatch");
    const int64_t n = x.shape[0], in = x.shape[1], out_dim = weight.shape[0];
    std::vector<double> c = matmul_abT(x.data.data(), n, in, weight.data.data(), out_dim);
    FloatTensor out({n, out_dim}, std::move(c));
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < out_dim; ++j)
            out.data[static_cast<size_t>(i * out_dim + j)] += bias[static_cast<size_t>(j)];
    instrument::add_flops(n * in * out_dim);
    return out;
}

FcGrads fc_backward(const FloatTensor& x, const FloatTensor& weight,
                    const FloatTensor& upstream) {
    const int64_t n = x.shape[0], in = x.shape[1], out_dim = weight.shape[0];
    if (upstream.shape != std::vector<int64_t>{n, out_dim})
        throw std::invalid_argument("fc_backward: upstream shape mismatch");
    FcGrads g;
    g.grad_x = FloatTensor({n, in},
                           matmul_ab(upstream.data.data(), n, out_dim, weight.data.data(), in));
    g.grad_weight = FloatTensor({out_dim, in});
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < out_dim; ++j) {
            const double u = upstream.data[static_cast<size_t>(i * out_dim + j)];
            if (u == 0.0) continue;
            const double* px = x.data.data() + i * in;
            double* pw = g.grad_weight.data.data() + j * in;
            for (int64_t t = 0; t < in; ++t) pw[t] += u * px[t];
        }
    g.grad_bias.assign(static_cast<size_t>(out_dim), 0.0);
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < out_dim; ++j)
            g.grad_bias[static_cast<size_t>(j)] +=
                upstream.data[static_cast<size_t>(i * out_dim + j)];
    return g;
}

// ---- Real convolution -----------------------------------------------------------

FloatTensor im2col_f(const FloatTensor& x, int64_t k_h, int64_t k_w, int64_t stride,
                     int64_t padding, double pad_value) {
    const ConvGeom g = conv_geometry(x.shape, k_h, k_w, stride, padding);
    const int64_t patch = g.in_ch * k_h * k_w;
    FloatTensor m({g.batch * g.out_h * g.out_w, patch});
    const int64_t plane = g.in_h * g.in_w;
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t n = 0; n < g.batch; ++n)
        for (int64_t oh = 0; oh < g.out_h; ++oh) {
            for (int64_t ow = 0; ow < g.out_w; ++ow) {
                const int64_t r = (n * g.out_h + oh) * g.out_w + ow;
                const int64_t h0 = oh * stride - padding;
                const int64_t w0 = ow * stride - padding;
                double* dst = m.data.data() + r * patch;
                int64_t col = 0;
                for (int64_t c = 0; c < g.in_ch; ++c) {
                    const double* src = x.data.data() + (n * g.in_ch + c) * plane;
                    for (int64_t kh = 0; kh < k_h; ++kh) {
                        const int64_t h = h0 + kh;
                        for (int64_t kw = 0; kw < k_w; ++kw, ++col) {
                            const int64_t w = w0 + kw;
                            dst[col] = (h >= 0 && h < g.in_h && w >= 0 && w < g.in_w)
                                           ? src[h * g.in_w + w]
                                           : pad_value;
                        }
                    }
                }
            }
        }
    return m;
}

FloatTensor col2im_f(const FloatTensor& cols, const std::vector<int64_t>& x_shape,
                     int64_t k_h, int64_t k_w, int64_t stride, int64_t padding) {
    const ConvGeom g = conv_geometry(x_shape, k_h, k_w, stride, padding);
    const int64_t patch = g.in_ch * k_h * k_w;
    FloatTensor x(x_shape);
    const int64_t plane = g.in_h * g.in_w;
    int64_t r = 0;
    for (int64_t n = 0; n < g.batch; ++n)
        for (int64_t oh = 0; oh < g.out_h; ++oh)
            for (int64_t ow = 0; ow < g.out_w; ++ow, ++r) {
                const int64_t h0 = oh * stride - padding;
                const int64_t w0 = ow * stride - padding;
                const double* src = cols.data.data() + r * patch;
                int64_t col = 0;
                for (int64_t c = 0; c < g.in_ch; ++c) {
                    double* dst = x.data.data() + (n * g.in_ch + c) * plane;
                    for (int64_t kh = 0; kh < k_h; ++kh) {
                        const int64_t h = h0 + kh;
                        for (int64_t kw = 0; kw < k_w; ++kw, ++col) {
                            const int64_t w = w0 + kw;
                            if (h >= 0 && h < g.in_h && w >= 0 && w < g.in_w)
                                dst[h * g.in_w + w] += src[col];
                        }
                    }
                }
            }
    return x;
}

FloatTensor real_conv2d(const FloatTensor& x, const FloatTensor& w, int64_t stride,
                        int64_t padding, int64_t groups, double pad_value) {
    if (w.shape.size() != 4) throw std::invalid_argument("real_conv2d: weights must be OIHW");
    const int64_t out_ch = w.shape[0], k_h = w.shape[2], k_w = w.shape[3];
    const ConvGeom g = conv_geometry(x.shape, k_h, k_w, stride, padding);
    if (groups < 1 || g.in_ch % groups != 0 || out_ch % groups != 0)
        throw std::invalid_argument("real_conv2d: groups must divide channel counts");
    if (w.shape[1] != g.in_ch / groups)
        throw std::invalid_argument("real_conv2d: weight input channels mismatch");

    const int64_t cg_in = g.in_ch / groups, cg_out = out_ch / groups;
    const int64_t patch = cg_in * k_h * k_w;
    const int64_t positions = g.out_h * g.out_w;
    FloatTensor out({g.batch, out_ch, g.out_h, g.out_w});
    for (int64_t grp = 0; grp < groups; ++grp) {
        const FloatTensor xg =
            groups == 1 ? x : channel_slice(x, grp * cg_in, (grp + 1) * cg_in);
        const FloatTensor cols = im2col_f(xg, k_h, k_w, stride, padding, pad_value);
        const double* wg = w.data.data() + grp * cg_out * patch;
        std::vector<double> c =
            matmul_abT(cols.data.data(), g.batch * positions, patch, wg, cg_out);
        for (int64_t n = 0; n < g.batch; ++n)
            for (int64_t o = 0; o < cg_out; ++o) {
                double* dst = out.data.data() + (n * out_ch + grp * cg_out + o) * positions;
                for (int64_t p = 0; p < positions; ++p)
                    dst[p] = c[static_cast<size_t>((n * positions + p) * cg_out + o)];
            }
    }
    instrument::add_flops(g.batch * positions * out_ch * patch);
    return out;
}

ConvGrads real_conv2d_backward(const FloatTensor& x, const FloatTensor& w,
                               const FloatTensor& upstream, int64_t stride,
                               int64_t padding, int64_t groups, double pad_value) {
    const int64_t out_ch = w.shape[0], k_h = w.shape[2], k_w = w.shape[3];
    const ConvGeom g = conv_geometry(x.shape, k_h, k_w, stride, padding);
    const int64_t cg_in = g.in_ch / groups, cg_out = out_ch / groups;
    const int64_t patch = cg_in * k_h * k_w;
    const int64_t positions = g.out_h * g.out_w;
    if (upstream.shape != std::vector<int64_t>{g.batch, out_ch, g.out_h, g.out_w})
        throw std::invalid_argument("real_conv2d_backward: upstream shape mismatch");

    ConvGrads grads;
    grads.grad_x = FloatTensor(x.shape);
    grads.grad_w = FloatTensor(w.shape);
    const int64_t rows = g.batch * positions;
    for (int64_t grp = 0; grp < groups; ++grp) {
        const FloatTensor xg =
            groups == 1 ? x : channel_slice(x, grp * cg_in, (grp + 1) * cg_in);
        const FloatTensor cols = im2col_f(xg, k_h, k_w, stride, padding, pad_value);
        // gather upstream for this group as (rows x cg_out)
        std::vector<double> gu(static_cast<size_t>(rows * cg_out));
        for (int64_t n = 0; n < g.batch; ++n)
            for (int64_t o = 0; o < cg_out; ++o) {
                const double* src =
                    upstream.data.data() + (n * out_ch + grp * cg_out + o) * positions;
                for (int64_t p = 0; p < positions; ++p)
                    gu[static_cast<size_t>((n * positions + p) * cg_out + o)] = src[p];
            }
        // grad_w[o,:] = sum_r gu[r,o] * cols[r,:]
        double* gw = grads.grad_w.data.data() + grp * cg_out * patch;
#pragma omp parallel for schedule(static)
        for (int64_t o = 0; o < cg_out; ++o) {
            double* dst = gw + o * patch;
            for (int64_t r = 0; r < rows; ++r) {
                const double u = gu[static_cast<size_t>(r * cg_out + o)];
                if (u == 0.0) continue;
                const double* src = cols.data.data() + r * patch;
                for (int64_t t = 0; t < patch; ++t) dst[t] += u * src[t];
            }
        }
        // grad_cols = gu * Wg, then col2im
        std::vector<double> gcols =
            matmul_ab(gu.data(), rows, cg_out, w.data.data() + grp * cg_out * patch, patch);
        FloatTensor gcols_t({rows, patch}, std::move(gcols));
        FloatTensor gx = col2im_f(gcols_t, {g.batch, cg_in, g.in_h, g.in_w}, k_h, k_w,
                                  stride, padding);
        if (groups == 1) {
            grads.grad_x = std::move(gx);
        } else {
            const int64_t plane = g.in_h * g.in_w;
            for (int64_t n = 0; n < g.batch; ++n)
                std::copy(gx.data.begin() + n * cg_in * plane,
                          gx.data.begin() + (n + 1) * cg_in * plane,
                          grads.grad_x.data.begin() + (n * g.in_ch + grp * cg_in) * plane);
        }
    }
    return grads;
}

// ---- Softmax --------------------------------------------------------------------

FloatTensor softmax(const FloatTensor& logits) {
    if (logits.shape.size() != 2) throw std::invalid_argument("softmax: (N,K) expected");
    logits.check_finite("softmax input");
    const int64_t n = logits.shape[0], k = logits.shape[1];
    FloatTensor out(logits.shape);
    for (int64_t i = 0; i < n; ++i) {
        const double* z = logits.data.data() + i * k;
        double* p = out.data.data() + i * k;
        double mx = z[0];
        for (int64_t j = 1; j < k; ++j) mx = std::max(mx, z[j]);
        double s = 0.0;
        for (int64_t j = 0; j < k; ++j) {
            p[j] = std::exp(z[j] - mx);
            s += p[j];
        }
        for (int64_t j = 0; j < k; ++j) p[j] /= s;
    }
    return out;
}

}  // namespace reactnet
