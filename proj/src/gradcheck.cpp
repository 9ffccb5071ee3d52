#include "reactnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "reactnet/activations.hpp"
#include "reactnet/arch.hpp"
#include "reactnet/layers.hpp"
#include "reactnet/loss.hpp"

namespace reactnet {

namespace {

FloatTensor random_tensor(const std::vector<int64_t>& shape, std::mt19937_64& rng,
                          double lo, double hi) {
    FloatTensor t(shape);
    std::uniform_real_distribution<double> d(lo, hi);
    for (double& v : t.data) v = d(rng);
    return t;
}

std::vector<double> random_vec(size_t n, std::mt19937_64& rng, double lo, double hi) {
    std::vector<double> v(n);
    std::uniform_real_distribution<double> d(lo, hi);
    for (double& x : v) x = d(rng);
    return v;
}

double rel_err(double fd, double an) {
    return std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1.0});
}

}  // namespace

double max_rel_err_fd(const std::function<double()>& loss, std::vector<double>& theta,
                      const std::vector<double>& analytic, double h) {
    double worst = 0.0;
    for (size_t i = 0; i < theta.size(); ++i) {
        const double keep = theta[i];
        theta[i] = keep + h;
        const double lp = loss();
        theta[i] = keep - h;
        const double lm = loss();
        theta[i] = keep;
        worst = std::max(worst, rel_err((lp - lm) / (2.0 * h), analytic[i]));
    }
    return worst;
}

namespace {

GradCheckResult report(const std::string& name, double err, double tol) {
    return {name, err, tol, err <= tol};
}

// Weighted-sum readout turns a tensor-valued forward into a scalar loss whose
// exact upstream gradient is the weight tensor itself.
double dot(const FloatTensor& a, const FloatTensor& c) {
    double s = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * c.data[i];
    return s;
}

void check_rsign(std::vector<GradCheckResult>& out, std::mt19937_64& rng) {
    const int64_t n = 2, c = 3, hw = 4;
    FloatTensor x = random_tensor({n, c, hw, hw}, rng, -1.4, 1.4);
    FloatTensor coeff = random_tensor(x.shape, rng, -1.0, 1.0);
    SignNode node(c, /*learn=*/true);
    node.p.alpha = random_vec(static_cast<size_t>(c), rng, -0.3, 0.3);
    ExecCtx smooth{true, true};

    auto loss = [&] { return dot(node.forward(x, smooth), coeff); };
    loss();
    std::fill(node.grad_alpha.begin(), node.grad_alpha.end(), 0.0);
    FloatTensor gx = node.backward(coeff);
    out.push_back(report("rsign/alpha",
                         max_rel_err_fd(loss, node.p.alpha, node.grad_alpha, 1e-6), 1e-5));
    out.push_back(report("rsign/input", max_rel_err_fd(loss, x.data, gx.data, 1e-6), 1e-5));
}

void check_rprelu(std::vector<GradCheckResult>& out, std::mt19937_64& rng) {
    const int64_t n = 2, c = 3, hw = 4;
    FloatTensor x = random_tensor({n, c, hw, hw}, rng, -2.0, 2.0);
    FloatTensor coeff = random_tensor(x.shape, rng, -1.0, 1.0);
    ActNode node(c, /*learn=*/true);
    node.p.beta = random_vec(static_cast<size_t>(c), rng, 0.1, 0.6);
    node.p.gamma = random_vec(static_cast<size_t>(c), rng, -0.3, 0.3);
    node.p.zeta = random_vec(static_cast<size_t>(c), rng, -0.3, 0.3);
    // away from the kink at x = gamma (the forward is only piecewise smooth)
    for (int64_t i = 0; i < x.numel(); ++i) {
        const int64_t ch = (i / (hw * hw)) % c;
        double& v = x.data[static_cast<size_t>(i)];
        const double g = node.p.gamma[static_cast<size_t>(ch)];
        if (std::abs(v - g) < 0.05) v = g + (v >= g ? 0.05 : -0.05);
    }

    ExecCtx ctx{true, false};
    auto loss = [&] { return dot(node.forward(x, ctx), coeff); };
    loss();
    std::fill(node.grad_beta.begin(), node.grad_beta.end(), 0.0);
    std::fill(node.grad_gamma.begin(), node.grad_gamma.end(), 0.0);
    std::fill(node.grad_zeta.begin(), node.grad_zeta.end(), 0.0);
    FloatTensor gx = node.backward(coeff);
    out.push_back(report("rprelu/beta",
                         max_rel_err_fd(loss, node.p.beta, node.grad_beta, 1e-6), 1e-7));
    out.push_back(report("rprelu/gamma",
                         max_rel_err_fd(loss, node.p.gamma, node.grad_gamma, 1e-6), 1e-7));
    out.push_back(report("rprelu/zeta",
                         max_rel_err_fd(loss, node.p.zeta, node.grad_zeta, 1e-6), 1e-7));
    out.push_back(report("rprelu/input", max_rel_err_fd(loss, x.data, gx.data, 1e-6), 1e-7));
}

void check_weight_binarize(std::vector<GradCheckResult>& out, std::mt19937_64& rng) {
    FloatTensor w = random_tensor({4, 4, 3, 3}, rng, 0.1, 0.9);
    std::bernoulli_distribution flip(0.5);
    for (double& v : w.data)
        if (flip(rng)) v = -v;
    FloatTensor coeff = random_tensor(w.shape, rng, -1.0, 1.0);

    auto loss = [&] { return dot(weight_binarize_smooth(w), coeff); };
    FloatTensor gw = weight_binarize_smooth_backward(w, coeff);
    out.push_back(
        report("weight-binarize/smooth", max_rel_err_fd(loss, w.data, gw.data, 1e-6), 1e-7));
}

void check_batchnorm(std::vector<GradCheckResult>& out, std::mt19937_64& rng) {
    const int64_t n = 3, c = 2, hw = 4;
    FloatTensor x = random_tensor({n, c, hw, hw}, rng, -2.0, 2.0);
    FloatTensor coeff = random_tensor(x.shape, rng, -1.0, 1.0);
    BnNode node(c);
    node.p.gamma_bn = random_vec(static_cast<size_t>(c), rng, 0.5, 1.5);
    node.p.beta_bn = random_vec(static_cast<size_t>(c), rng, -0.5, 0.5);

    ExecCtx ctx{true, false};
    auto loss = [&] { return dot(node.forward(x, ctx), coeff); };
    loss();
    std::fill(node.grad_gamma.begin(), node.grad_gamma.end(), 0.0);
    std::fill(node.grad_beta.begin(), node.grad_beta.end(), 0.0);
    FloatTensor gx = node.backward(coeff);
    out.push_back(report("batchnorm/gamma",
                         max_rel_err_fd(loss, node.p.gamma_bn, node.grad_gamma, 1e-6), 1e-7));
    out.push_back(report("batchnorm/beta",
                         max_rel_err_fd(loss, node.p.beta_bn, node.grad_beta, 1e-6), 1e-7));
    out.push_back(
        report("batchnorm/input", max_rel_err_fd(loss, x.data, gx.data, 1e-6), 1e-7));
}

void check_fc(std::vector<GradCheckResult>& out, std::mt19937_64& rng) {
    const int64_t n = 3, in = 6, k = 4;
    FloatTensor x = random_tensor({n, in}, rng, -1.0, 1.0);
    FloatTensor w = random_tensor({k, in}, rng, -0.5, 0.5);
    std::vector<double> b = random_vec(static_cast<size_t>(k), rng, -0.5, 0.5);
    FloatTensor coeff = random_tensor({n, k}, rng, -1.0, 1.0);

    auto loss = [&] { return dot(fc_forward(x, w, b), coeff); };
    FcGrads g = fc_backward(x, w, coeff);
    out.push_back(report("fc/weight", max_rel_err_fd(loss, w.data, g.grad_weight.data, 1e-6),
                         1e-8));
    out.push_back(report("fc/bias", max_rel_err_fd(loss, b, g.grad_bias, 1e-6), 1e-8));
    out.push_back(report("fc/input", max_rel_err_fd(loss, x.data, g.grad_x.data, 1e-6), 1e-8));
}

void check_losses(std::vector<GradCheckResult>& out, std::mt19937_64& rng) {
    const int64_t n = 5, k = 7;
    FloatTensor logits = random_tensor({n, k}, rng, -2.0, 2.0);
    FloatTensor teacher = random_tensor({n, k}, rng, -2.0, 2.0);
    teacher = softmax(teacher);

    auto kl = [&] { return distributional_loss(logits, teacher); };
    FloatTensor g = distributional_loss_backward(logits, teacher);
    out.push_back(report("loss/distributional",
                         max_rel_err_fd(kl, logits.data, g.data, 1e-6), 1e-8));

    std::vector<int> labels;
    std::uniform_int_distribution<int> pick(0, static_cast<int>(k) - 1);
    for (int64_t i = 0; i < n; ++i) labels.push_back(pick(rng));
    auto ce = [&] { return cross_entropy(logits, labels); };
    FloatTensor gce = cross_entropy_backward(logits, labels);
    out.push_back(
        report("loss/cross-entropy", max_rel_err_fd(ce, logits.data, gce.data, 1e-6), 1e-8));
}

// Whole-network composite in smooth mode: stem, a binary normal block and the
// classifier, trained against the distributional objective. Every learnable
// parameter is finite-differenced.
void check_network(std::vector<GradCheckResult>& out, std::mt19937_64& rng) {
    NetworkSpec spec;
    spec.variant = "gradcheck";
    spec.input_shape = {1, 8, 8};
    spec.num_classes = 4;
    spec.use_rsign = true;
    spec.use_rprelu = true;
    spec.blocks = {{BlockKind::Stem, 1, 4, 1},
                   {BlockKind::Normal, 4, 4, 1},
                   {BlockKind::Reduction, 4, 8, 2},
                   {BlockKind::Classifier, 8, 4, 1}};
    Network net(spec, 7);

    FloatTensor x = random_tensor({2, 1, 8, 8}, rng, -1.0, 1.0);
    FloatTensor teacher = softmax(random_tensor({2, 4}, rng, -1.0, 1.0));

    // keep latent weights clear of the |w| and clip kinks of the surrogate
    for (ParamRef& p : net.params())
        if (p.clip_latent)
            for (double& w : *p.value) {
                if (std::abs(w) < 0.02) w = w < 0 ? -0.02 : 0.02;
                if (std::abs(w) > 0.98) w = w < 0 ? -0.98 : 0.98;
            }

    auto loss = [&] {
        return distributional_loss(net.forward(x, /*training=*/true, /*smooth=*/true),
                                   teacher);
    };
    FloatTensor logits = net.forward(x, true, true);
    net.zero_grads();
    net.backward(distributional_loss_backward(logits, teacher));

    double worst = 0.0;
    for (ParamRef& p : net.params())
        worst = std::max(worst, max_rel_err_fd(loss, *p.value, *p.grad, 1e-6));
    out.push_back(report("network/composite", worst, 1e-4));
}

}  // namespace

std::vector<GradCheckResult> run_grad_checks(uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<GradCheckResult> out;
    check_rsign(out, rng);
    check_rprelu(out, rng);
    check_weight_binarize(out, rng);
    check_batchnorm(out, rng);
    check_fc(out, rng);
    check_losses(out, rng);
    check_network(out, rng);
    return out;
}

bool all_passed(const std::vector<GradCheckResult>& results) {
    return std::all_of(results.begin(), results.end(),
                       [](const GradCheckResult& r) { return r.passed; });
}

}  // namespace reactnet
