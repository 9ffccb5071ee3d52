#include "reactnet/arch.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace reactnet {

namespace {

// probe plumbing: forward passes are single-threaded at the node level
ActivationProbe* g_probe = nullptr;
thread_local const char* g_site = "";

FloatTensor add(const FloatTensor& a, const FloatTensor& b) {
    if (a.shape != b.shape) throw std::invalid_argument("add: shape mismatch");
    FloatTensor out(a.shape);
    for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] + b.data[i];
    return out;
}

FloatTensor concat_channels(const FloatTensor& a, const FloatTensor& b) {
    const int64_t n = a.shape[0], ca = a.shape[1], cb = b.shape[1];
    const int64_t plane = a.shape[2] * a.shape[3];
    FloatTensor out({n, ca + cb, a.shape[2], a.shape[3]});
    for (int64_t i = 0; i < n; ++i) {
        std::copy(a.data.begin() + i * ca * plane, a.data.begin() + (i + 1) * ca * plane,
                  out.data.begin() + i * (ca + cb) * plane);
        std::copy(b.data.begin() + i * cb * plane, b.data.begin() + (i + 1) * cb * plane,
                  out.data.begin() + (i * (ca + cb) + ca) * plane);
    }
    return out;
}

std::pair<FloatTensor, FloatTensor> split_channels(const FloatTensor& x, int64_t ca) {
    const int64_t n = x.shape[0], c = x.shape[1], plane = x.shape[2] * x.shape[3];
    const int64_t cb = c - ca;
    FloatTensor a({n, ca, x.shape[2], x.shape[3]});
    FloatTensor b({n, cb, x.shape[2], x.shape[3]});
    for (int64_t i = 0; i < n; ++i) {
        std::copy(x.data.begin() + i * c * plane, x.data.begin() + (i * c + ca) * plane,
                  a.data.begin() + i * ca * plane);
        std::copy(x.data.begin() + (i * c + ca) * plane, x.data.begin() + (i + 1) * c * plane,
                  b.data.begin() + i * cb * plane);
    }
    return {std::move(a), std::move(b)};
}

}  // namespace

// ---- nodes -------------------------------------------------------------------

FloatTensor SignNode::forward(const FloatTensor& x, const ExecCtx& ctx) {
    if (g_probe && g_probe->enabled)
        g_probe->samples.emplace_back(g_site, x.data);
    x_cache = x;
    smooth_cache = ctx.smooth;
    if (!ctx.smooth) return rsign_forward_pm1(x, p);
    FloatTensor out(x.shape);
    const int64_t n = x.shape[0], c = x.shape[1], plane = x.shape[2] * x.shape[3];
    int64_t i = 0;
    for (int64_t b = 0; b < n; ++b)
        for (int64_t ch = 0; ch < c; ++ch) {
            const double a = p.alpha[static_cast<size_t>(ch)];
            for (int64_t q = 0; q < plane; ++q, ++i)
                out.data[static_cast<size_t>(i)] =
                    approx_sign(x.data[static_cast<size_t>(i)] - a);
        }
    return out;
}

FloatTensor SignNode::backward(const FloatTensor& upstream) {
    if (!smooth_cache) {
        RSignGrads g = rsign_backward(x_cache, p, upstream);
        if (learnable)
            for (size_t i = 0; i < grad_alpha.size(); ++i) grad_alpha[i] += g.grad_alpha[i];
        return std::move(g.grad_x);
    }
    // exact derivative of the surrogate forward
    FloatTensor gx(x_cache.shape);
    const int64_t n = x_cache.shape[0], c = x_cache.shape[1];
    const int64_t plane = x_cache.shape[2] * x_cache.shape[3];
    int64_t i = 0;
    for (int64_t b = 0; b < n; ++b)
        for (int64_t ch = 0; ch < c; ++ch) {
            const double a = p.alpha[static_cast<size_t>(ch)];
            double ga = 0.0;
            for (int64_t q = 0; q < plane; ++q, ++i) {
                const double d =
                    approx_sign_grad(x_cache.data[static_cast<size_t>(i)] - a);
                const double up = upstream.data[static_cast<size_t>(i)];
                gx.data[static_cast<size_t>(i)] = up * d;
                ga -= up * d;
            }
            if (learnable) grad_alpha[static_cast<size_t>(ch)] += ga;
        }
    return gx;
}

FloatTensor ActNode::forward(const FloatTensor& x, const ExecCtx&) {
    x_cache = x;
    return rprelu_forward(x, p);
}

FloatTensor ActNode::backward(const FloatTensor& upstream) {
    RPReLUGrads g = rprelu_backward(x_cache, p, upstream);
    if (learnable)
        for (size_t i = 0; i < grad_beta.size(); ++i) {
            grad_beta[i] += g.grad_beta[i];
            grad_gamma[i] += g.grad_gamma[i];
            grad_zeta[i] += g.grad_zeta[i];
        }
    return std::move(g.grad_x);
}

FloatTensor BinConvNode::forward(const FloatTensor& x, const ExecCtx& ctx) {
    if (!ctx.training && !ctx.smooth && binarize) {
        // inference path: pure XNOR + popcount
        return binary_conv2d(pack(x), BinaryConvParams::from_real(w), stride, padding);
    }
    x_cache = x;
    smooth_cache = ctx.smooth;
    w_eff_cache = binarize ? (ctx.smooth ? weight_binarize_smooth(w) : binarize_weights(w))
                           : w;
    return real_conv2d(x, w_eff_cache, stride, padding, 1, -1.0);
}

FloatTensor BinConvNode::backward(const FloatTensor& upstream) {
    ConvGrads g =
        real_conv2d_backward(x_cache, w_eff_cache, upstream, stride, padding, 1, -1.0);
    FloatTensor gl = binarize ? (smooth_cache ? weight_binarize_smooth_backward(w, g.grad_w)
                                              : weight_binarize_backward(w, g.grad_w))
                              : std::move(g.grad_w);
    for (size_t i = 0; i < grad_w.size(); ++i) grad_w[i] += gl.data[i];
    return std::move(g.grad_x);
}

FloatTensor RealConvNode::forward(const FloatTensor& x, const ExecCtx&) {
    x_cache = x;
    return real_conv2d(x, w, stride, padding, groups, 0.0);
}

FloatTensor RealConvNode::backward(const FloatTensor& upstream) {
    ConvGrads g = real_conv2d_backward(x_cache, w, upstream, stride, padding, groups, 0.0);
    for (size_t i = 0; i < grad_w.size(); ++i) grad_w[i] += g.grad_w.data[i];
    return std::move(g.grad_x);
}

FloatTensor BnNode::forward(const FloatTensor& x, const ExecCtx& ctx) {
    return batchnorm_forward(x, p, ctx.training, &cache);
}

FloatTensor BnNode::backward(const FloatTensor& upstream) {
    BatchNormGrads g = batchnorm_backward(cache, p, upstream);
    for (size_t i = 0; i < grad_gamma.size(); ++i) {
        grad_gamma[i] += g.grad_gamma[i];
        grad_beta[i] += g.grad_beta[i];
    }
    return std::move(g.grad_x);
}

// ---- unit ----------------------------------------------------------------------

Unit::Unit(int64_t in_ch, int64_t out_ch, int64_t k, int64_t stride, bool binary_,
           bool shortcut, bool use_rsign, bool use_rprelu, int64_t groups)
    : binary(binary_), has_shortcut(shortcut), bn(out_ch), act(out_ch, use_rprelu) {
    const int64_t pad = k / 2;
    if (binary) {
        if (groups != 1) throw std::invalid_argument("binary units are ungrouped");
        sign = std::make_unique<SignNode>(in_ch, use_rsign);
        bconv = std::make_unique<BinConvNode>(out_ch, in_ch, k, stride, pad);
    } else {
        rconv = std::make_unique<RealConvNode>(out_ch, in_ch / groups, k, k, stride, pad,
                                               groups);
    }
}

FloatTensor Unit::forward(const FloatTensor& x, const ExecCtx& ctx) {
    x_shape_cache = x.shape;
    const int64_t stride = binary ? bconv->stride : rconv->stride;
    pooled_cache = has_shortcut && stride == 2;
    FloatTensor c = binary ? bconv->forward(sign->forward(x, ctx), ctx)
                           : rconv->forward(x, ctx);
    FloatTensor b = bn.forward(c, ctx);
    FloatTensor y = has_shortcut ? add(b, pooled_cache ? avgpool2x2(x) : x) : std::move(b);
    return act.forward(y, ctx);
}

FloatTensor Unit::backward(const FloatTensor& upstream, const ExecCtx&) {
    FloatTensor gy = act.backward(upstream);
    FloatTensor gc = bn.backward(gy);
    FloatTensor gx = binary ? sign->backward(bconv->backward(gc)) : rconv->backward(gc);
    if (has_shortcut) {
        if (pooled_cache)
            gx = add(gx, avgpool2x2_backward(x_shape_cache, gy));
        else
            gx = add(gx, gy);
    }
    return gx;
}

void Unit::collect(std::vector<ParamRef>& out, const std::string& prefix) {
    if (binary) {
        if (sign->learnable)
            out.push_back({prefix + "/alpha", &sign->p.alpha, &sign->grad_alpha, false, false,
                           true});
        out.push_back({prefix + "/w", &bconv->w.data, &bconv->grad_w, true, true, false});
    } else {
        out.push_back({prefix + "/w", &rconv->w.data, &rconv->grad_w, true, false, false});
    }
    out.push_back({prefix + "/bn_gamma", &bn.p.gamma_bn, &bn.grad_gamma, false, false, false});
    out.push_back({prefix + "/bn_beta", &bn.p.beta_bn, &bn.grad_beta, false, false, false});
    if (act.learnable) {
        out.push_back({prefix + "/beta", &act.p.beta, &act.grad_beta, false, false, true});
        out.push_back({prefix + "/gamma", &act.p.gamma, &act.grad_gamma, false, false, true});
        out.push_back({prefix + "/zeta", &act.p.zeta, &act.grad_zeta, false, false, true});
    }
}

// ---- block -----------------------------------------------------------------------

FloatTensor Block::forward(const FloatTensor& x, const ExecCtx& ctx) {
    switch (kind) {
        case BlockKind::Stem: {
            FloatTensor c = stem_conv->forward(x, ctx);
            FloatTensor b = stem_bn->forward(c, ctx);
            return stem_act->forward(b, ctx);
        }
        case BlockKind::Normal: {
            FloatTensor z = unit3->forward(x, ctx);
            return unit1->forward(z, ctx);
        }
        case BlockKind::Reduction: {
            FloatTensor z = unit3->forward(x, ctx);
            if (concat) {
                concat_in_cache = z;
                FloatTensor o1 = down_a->forward(z, ctx);
                FloatTensor o2 = down_b->forward(z, ctx);
                return concat_channels(o1, o2);
            }
            return down_a->forward(z, ctx);
        }
        case BlockKind::Classifier: {
            gap_in_shape = x.shape;
            fc_x_cache = global_avgpool(x);
            return fc_forward(fc_x_cache, *fc_w, fc_b);
        }
    }
    throw std::logic_error("unreachable");
}

FloatTensor Block::backward(const FloatTensor& upstream, const ExecCtx& ctx) {
    switch (kind) {
        case BlockKind::Stem: {
            FloatTensor gb = stem_act->backward(upstream);
            FloatTensor gc = stem_bn->backward(gb);
            return stem_conv->backward(gc);
        }
        case BlockKind::Normal: {
            FloatTensor gz = unit1->backward(upstream, ctx);
            return unit3->backward(gz, ctx);
        }
        case BlockKind::Reduction: {
            FloatTensor gz;
            if (concat) {
                auto [u1, u2] = split_channels(upstream, upstream.shape[1] / 2);
                gz = add(down_a->backward(u1, ctx), down_b->backward(u2, ctx));
            } else {
                gz = down_a->backward(upstream, ctx);
            }
            return unit3->backward(gz, ctx);
        }
        case BlockKind::Classifier: {
            FcGrads g = fc_backward(fc_x_cache, *fc_w, upstream);
            for (size_t i = 0; i < grad_fc_w.size(); ++i) grad_fc_w[i] += g.grad_weight.data[i];
            for (size_t i = 0; i < grad_fc_b.size(); ++i) grad_fc_b[i] += g.grad_bias[i];
            return global_avgpool_backward(gap_in_shape, g.grad_x);
        }
    }
    throw std::logic_error("unreachable");
}

void Block::collect(std::vector<ParamRef>& out, const std::string& prefix) {
    switch (kind) {
        case BlockKind::Stem:
            out.push_back({prefix + "/w", &stem_conv->w.data, &stem_conv->grad_w, true, false,
                           false});
            out.push_back({prefix + "/bn_gamma", &stem_bn->p.gamma_bn, &stem_bn->grad_gamma,
                           false, false, false});
            out.push_back({prefix + "/bn_beta", &stem_bn->p.beta_bn, &stem_bn->grad_beta,
                           false, false, false});
            break;
        case BlockKind::Normal:
            unit3->collect(out, prefix + "/u3");
            unit1->collect(out, prefix + "/u1");
            break;
        case BlockKind::Reduction:
            unit3->collect(out, prefix + "/u3");
            down_a->collect(out, prefix + "/da");
            if (concat) down_b->collect(out, prefix + "/db");
            break;
        case BlockKind::Classifier:
            out.push_back({prefix + "/w", &fc_w->data, &grad_fc_w, true, false, false});
            out.push_back({prefix + "/b", &fc_b, &grad_fc_b, false, false, false});
            break;
    }
}

// ---- spec construction -------------------------------------------------------------

NetworkSpec build_network(const std::string& variant, Scale scale, int64_t input_channels,
                          int64_t num_classes) {
    NetworkSpec s;
    s.variant = variant == "reactnet" ? "reactnet-a" : variant;
    if (s.variant == "baseline" || s.variant == "real") {
    } else if (s.variant == "reactnet-a") {
        s.use_rsign = s.use_rprelu = true;
    } else if (s.variant == "reactnet-b") {
        s.use_rsign = s.use_rprelu = true;
        s.down = DownFlavor::RealGroup4;
    } else if (s.variant == "reactnet-c") {
        s.use_rsign = s.use_rprelu = true;
        s.down = DownFlavor::RealFull;
    } else if (s.variant == "rsign-only") {
        s.use_rsign = true;
    } else if (s.variant == "rprelu-only") {
        s.use_rprelu = true;
    } else if (s.variant == "baseline-direct") {
        s.down = DownFlavor::BinaryDirect;
    } else {
        throw std::invalid_argument("unknown variant: " + variant);
    }
    s.real_network = s.variant == "real";

    if (scale == Scale::Paper) {
        s.input_shape = {input_channels < 0 ? 3 : input_channels, 224, 224};
        s.num_classes = num_classes < 0 ? 1000 : num_classes;
        s.blocks.push_back({BlockKind::Stem, s.input_shape[0], 32, 2});
        // MobileNetV1 channel schedule; a channel jump means a reduction block
        const std::vector<std::pair<int64_t, int64_t>> pairs = {
            {64, 1},  {128, 2}, {128, 1}, {256, 2},  {256, 1},  {512, 2}, {512, 1},
            {512, 1}, {512, 1}, {512, 1}, {512, 1},  {1024, 2}, {1024, 1}};
        int64_t c = 32;
        for (auto [out, stride] : pairs) {
            if (out == c)
                s.blocks.push_back({BlockKind::Normal, c, c, stride});
            else
                s.blocks.push_back({BlockKind::Reduction, c, out, stride});
            c = out;
        }
        s.blocks.push_back({BlockKind::Classifier, c, s.num_classes, 1});
    } else {
        s.input_shape = {input_channels < 0 ? 1 : input_channels, 32, 32};
        s.num_classes = num_classes < 0 ? 10 : num_classes;
        s.blocks.push_back({BlockKind::Stem, s.input_shape[0], 16, 1});
        s.blocks.push_back({BlockKind::Normal, 16, 16, 1});
        s.blocks.push_back({BlockKind::Reduction, 16, 32, 2});
        s.blocks.push_back({BlockKind::Normal, 32, 32, 1});
        s.blocks.push_back({BlockKind::Reduction, 32, 64, 2});
        s.blocks.push_back({BlockKind::Normal, 64, 64, 1});
        s.blocks.push_back({BlockKind::Classifier, 64, s.num_classes, 1});
    }
    return s;
}

bool check_channel_invariant(const NetworkSpec& spec) {
    if (spec.real_network) return true;  // no 1-bit convolutions at all
    for (const BlockSpec& b : spec.blocks) {
        if (b.kind == BlockKind::Normal) {
            if (b.in_ch != b.out_ch) return false;
        } else if (b.kind == BlockKind::Reduction) {
            if (b.out_ch != 2 * b.in_ch) return false;
            // 3x3 stage is C->C by construction; the downsample stage only
            // keeps equal channels in the concat flavor
            if (spec.down == DownFlavor::BinaryDirect) return false;
        }
    }
    return true;
}

std::string spec_to_text(const NetworkSpec& spec) {
    std::ostringstream os;
    os << "variant=" << spec.variant << "\n";
    os << "input=" << spec.input_shape[0] << "x" << spec.input_shape[1] << "x"
       << spec.input_shape[2] << "\n";
    os << "num_classes=" << spec.num_classes << "\n";
    os << "use_rsign=" << (spec.use_rsign ? 1 : 0) << "\n";
    os << "use_rprelu=" << (spec.use_rprelu ? 1 : 0) << "\n";
    const char* down = spec.down == DownFlavor::ConcatBinary  ? "concat-binary"
                       : spec.down == DownFlavor::BinaryDirect ? "binary-direct"
                       : spec.down == DownFlavor::RealGroup4   ? "real-group4"
                                                               : "real-full";
    os << "downsample=" << down << "\n";
    os << "real_network=" << (spec.real_network ? 1 : 0) << "\n";
    for (size_t i = 0; i < spec.blocks.size(); ++i) {
        const BlockSpec& b = spec.blocks[i];
        const char* kind = b.kind == BlockKind::Stem      ? "stem"
                           : b.kind == BlockKind::Normal  ? "normal"
                           : b.kind == BlockKind::Reduction ? "reduction"
                                                            : "classifier";
        os << "block" << i << "=" << kind << " in=" << b.in_ch << " out=" << b.out_ch
           << " stride=" << b.stride << "\n";
    }
    return os.str();
}

// ---- network ----------------------------------------------------------------------

Network::Network(NetworkSpec spec, uint64_t seed) : spec_(std::move(spec)) {
    std::mt19937_64 rng(seed);
    auto init_tensor = [&rng](FloatTensor& w, int64_t fan_in) {
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
        for (double& v : w.data) v = dist(rng);
    };
    const bool real = spec_.real_network;
    for (const BlockSpec& bs : spec_.blocks) {
        Block b;
        b.kind = bs.kind;
        switch (bs.kind) {
            case BlockKind::Stem:
                b.stem_conv = std::make_unique<RealConvNode>(bs.out_ch, bs.in_ch, 3, 3,
                                                             bs.stride, 1, 1);
                init_tensor(b.stem_conv->w, bs.in_ch * 9);
                b.stem_bn = std::make_unique<BnNode>(bs.out_ch);
                b.stem_act = std::make_unique<ActNode>(bs.out_ch, false);
                break;
            case BlockKind::Normal:
                b.unit3 = std::make_unique<Unit>(bs.in_ch, bs.in_ch, 3, bs.stride, !real,
                                                 true, spec_.use_rsign, spec_.use_rprelu);
                b.unit1 = std::make_unique<Unit>(bs.in_ch, bs.in_ch, 1, 1, !real, true,
                                                 spec_.use_rsign, spec_.use_rprelu);
                init_tensor(real ? b.unit3->rconv->w : b.unit3->bconv->w, bs.in_ch * 9);
                init_tensor(real ? b.unit1->rconv->w : b.unit1->bconv->w, bs.in_ch);
                break;
            case BlockKind::Reduction: {
                b.unit3 = std::make_unique<Unit>(bs.in_ch, bs.in_ch, 3, bs.stride, !real,
                                                 true, spec_.use_rsign, spec_.use_rprelu);
                init_tensor(real ? b.unit3->rconv->w : b.unit3->bconv->w, bs.in_ch * 9);
                if (real || spec_.down == DownFlavor::ConcatBinary) {
                    b.concat = true;
                    b.down_a = std::make_unique<Unit>(bs.in_ch, bs.in_ch, 1, 1, !real, true,
                                                      spec_.use_rsign, spec_.use_rprelu);
                    b.down_b = std::make_unique<Unit>(bs.in_ch, bs.in_ch, 1, 1, !real, true,
                                                      spec_.use_rsign, spec_.use_rprelu);
                    init_tensor(real ? b.down_a->rconv->w : b.down_a->bconv->w, bs.in_ch);
                    init_tensor(real ? b.down_b->rconv->w : b.down_b->bconv->w, bs.in_ch);
                } else if (spec_.down == DownFlavor::BinaryDirect) {
                    b.down_a = std::make_unique<Unit>(bs.in_ch, bs.out_ch, 1, 1, true, false,
                                                      spec_.use_rsign, spec_.use_rprelu);
                    init_tensor(b.down_a->bconv->w, bs.in_ch);
                } else {
                    const int64_t groups = spec_.down == DownFlavor::RealGroup4 ? 4 : 1;
                    b.down_a = std::make_unique<Unit>(bs.in_ch, bs.out_ch, 1, 1, false, false,
                                                      spec_.use_rsign, spec_.use_rprelu,
                                                      groups);
                    init_tensor(b.down_a->rconv->w, bs.in_ch / groups);
                }
                break;
            }
            case BlockKind::Classifier: {
                b.fc_w = std::make_unique<FloatTensor>(
                    std::vector<int64_t>{bs.out_ch, bs.in_ch});
                init_tensor(*b.fc_w, bs.in_ch);
                b.grad_fc_w.assign(static_cast<size_t>(b.fc_w->numel()), 0.0);
                b.fc_b.assign(static_cast<size_t>(bs.out_ch), 0.0);
                b.grad_fc_b.assign(static_cast<size_t>(bs.out_ch), 0.0);
                break;
            }
        }
        blocks_.push_back(std::move(b));
    }
    set_binarize_weights(true);
}

FloatTensor Network::forward(const FloatTensor& x, bool training, bool smooth) {
    if (x.shape.size() != 4 || x.shape[1] != spec_.input_shape[0] ||
        x.shape[2] != spec_.input_shape[1] || x.shape[3] != spec_.input_shape[2])
        throw std::invalid_argument("Network::forward: input shape mismatch, expected NCHW " +
                                    shape_str(spec_.input_shape) + " got " +
                                    shape_str(x.shape));
    last_ctx_ = ExecCtx{training, smooth};
    g_probe = &probe;
    FloatTensor cur = x;
    for (size_t i = 0; i < blocks_.size(); ++i) {
        g_site = "";
        static thread_local std::string site;
        site = "block" + std::to_string(i);
        g_site = site.c_str();
        cur = blocks_[i].forward(cur, last_ctx_);
    }
    g_probe = nullptr;
    cur.check_finite("network logits");
    return cur;
}

FloatTensor Network::backward(const FloatTensor& grad_logits) {
    FloatTensor cur = grad_logits;
    for (size_t i = blocks_.size(); i-- > 0;) cur = blocks_[i].backward(cur, last_ctx_);
    return cur;
}

void Network::zero_grads() {
    for (ParamRef& p : params())
        std::fill(p.grad->begin(), p.grad->end(), 0.0);
}

std::vector<ParamRef> Network::params() {
    std::vector<ParamRef> out;
    for (size_t i = 0; i < blocks_.size(); ++i)
        blocks_[i].collect(out, "block" + std::to_string(i));
    return out;
}

std::vector<std::pair<std::string, std::vector<double>*>> Network::state() {
    std::vector<std::pair<std::string, std::vector<double>*>> out;
    for (ParamRef& p : params()) out.emplace_back(p.name, p.value);
    for (size_t i = 0; i < blocks_.size(); ++i) {
        Block& b = blocks_[i];
        const std::string prefix = "block" + std::to_string(i);
        auto add_bn = [&out](const std::string& name, BnNode* bn) {
            if (!bn) return;
            out.emplace_back(name + "/bn_rmean", &bn->p.running_mean);
            out.emplace_back(name + "/bn_rvar", &bn->p.running_var);
        };
        add_bn(prefix, b.stem_bn.get());
        if (b.unit3) add_bn(prefix + "/u3", &b.unit3->bn);
        if (b.unit1) add_bn(prefix + "/u1", &b.unit1->bn);
        if (b.down_a) add_bn(prefix + "/da", &b.down_a->bn);
        if (b.down_b) add_bn(prefix + "/db", &b.down_b->bn);
    }
    return out;
}

std::vector<BatchNormParams*> Network::bn_params() {
    std::vector<BatchNormParams*> out;
    for (Block& b : blocks_) {
        if (b.stem_bn) out.push_back(&b.stem_bn->p);
        for (Unit* u : {b.unit3.get(), b.unit1.get(), b.down_a.get(), b.down_b.get()})
            if (u) out.push_back(&u->bn.p);
    }
    return out;
}

void Network::set_binarize_weights(bool on) {
    binarize_ = on;
    for (Block& b : blocks_) {
        for (Unit* u : {b.unit3.get(), b.unit1.get(), b.down_a.get(), b.down_b.get()})
            if (u && u->binary) u->bconv->binarize = on;
    }
}

}  // namespace reactnet
