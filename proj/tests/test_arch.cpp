#include <doctest.h>

#include <map>
#include <random>

#include "reactnet/arch.hpp"

using namespace reactnet;

namespace {

FloatTensor randn(const std::vector<int64_t>& shape, uint64_t seed) {
    FloatTensor t(shape);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    for (double& v : t.data) v = d(rng);
    return t;
}

}  // namespace

TEST_CASE("every variant passes the equal-in/out-channel walk at both scales") {
    for (const char* v : {"baseline", "reactnet-a", "reactnet-b", "reactnet-c",
                          "rsign-only", "rprelu-only", "real"})
        for (Scale s : {Scale::Desk, Scale::Paper}) {
            NetworkSpec spec = build_network(v, s);
            CAPTURE(v);
            CHECK(check_channel_invariant(spec));
        }
    // direct binarized downsampling violates the equal-channel rule by design
    CHECK_FALSE(check_channel_invariant(build_network("baseline-direct", Scale::Desk)));
    CHECK_THROWS(build_network("no-such-variant", Scale::Desk));
}

TEST_CASE("paper-scale reactnet-a has the MobileNet-derived layout") {
    NetworkSpec spec = build_network("reactnet-a", Scale::Paper);
    CHECK(spec.input_shape == std::vector<int64_t>{3, 224, 224});
    CHECK(spec.blocks.front().kind == BlockKind::Stem);
    CHECK(spec.blocks.back().kind == BlockKind::Classifier);
    CHECK(spec.blocks[spec.blocks.size() - 2].out_ch == 1024);
    int64_t reductions = 0;
    for (const BlockSpec& b : spec.blocks)
        if (b.kind == BlockKind::Reduction) ++reductions;
    CHECK(reductions == 5);  // every channel jump: 64, 128, 256, 512, 1024
}

TEST_CASE("desk-scale forward produces logits of the right shape") {
    Network net(build_network("reactnet-a", Scale::Desk, 1, 10), 5);
    FloatTensor x = randn({3, 1, 32, 32}, 7);
    FloatTensor out = net.forward(x, false);
    CHECK(out.shape == std::vector<int64_t>{3, 10});
    out.check_finite("logits");
}

TEST_CASE("forward is deterministic and seed changes the init") {
    FloatTensor x = randn({2, 1, 32, 32}, 3);
    Network a(build_network("reactnet-a", Scale::Desk, 1, 10), 5);
    Network b(build_network("reactnet-a", Scale::Desk, 1, 10), 5);
    Network c(build_network("reactnet-a", Scale::Desk, 1, 10), 6);
    CHECK(a.forward(x, false).data == b.forward(x, false).data);
    CHECK(a.forward(x, false).data != c.forward(x, false).data);
}

TEST_CASE("ReAct coefficients start at the baseline values") {
    Network net(build_network("reactnet-a", Scale::Desk, 1, 10), 5);
    for (const ParamRef& p : net.params()) {
        if (!p.react_coeff) continue;
        const bool is_beta = p.name.ends_with("/beta");
        for (double v : *p.value) CHECK(v == (is_beta ? 0.25 : 0.0));
    }
}

TEST_CASE("ReAct at init forwards bitwise-identically to baseline") {
    // both nets binarize weights; seed the same latent weights by name
    Network react(build_network("reactnet-a", Scale::Desk, 1, 10), 5);
    Network base(build_network("baseline", Scale::Desk, 1, 10), 5);
    std::map<std::string, std::vector<double>*> rp;
    for (ParamRef& p : react.params()) rp[p.name] = p.value;
    for (ParamRef& p : base.params())
        if (rp.count(p.name)) *p.value = *rp[p.name];
    FloatTensor x = randn({2, 1, 32, 32}, 11);
    CHECK(react.forward(x, false).data == base.forward(x, false).data);
}

TEST_CASE("ReAct parameter overhead is exactly 4 x channels per activation pair") {
    auto count = [](Network& n, bool coeff_only) {
        int64_t total = 0;
        for (const ParamRef& p : n.params())
            if (!coeff_only || p.react_coeff) total += static_cast<int64_t>(p.value->size());
        return total;
    };
    Network react(build_network("reactnet-a", Scale::Desk, 1, 10), 5);
    Network base(build_network("baseline", Scale::Desk, 1, 10), 5);
    CHECK(count(base, true) == 0);  // baseline has no learnable activation params

    // every binary unit is one sign/RPReLU pair acting on out_ch channels
    int64_t expected = 0;
    for (const BlockSpec& b : react.spec().blocks) {
        if (b.kind == BlockKind::Normal) expected += 4 * b.out_ch + 4 * b.out_ch;
        if (b.kind == BlockKind::Reduction)
            expected += 4 * b.in_ch            // 3x3 unit pair (in_ch channels)
                        + 2 * 4 * b.in_ch;     // two concat 1x1 unit pairs
    }
    CHECK(count(react, true) == expected);
    CHECK(count(react, false) - count(base, false) == expected);
}

TEST_CASE("rsign-only and rprelu-only expose exactly their own coefficients") {
    Network rs(build_network("rsign-only", Scale::Desk, 1, 10), 5);
    Network rp(build_network("rprelu-only", Scale::Desk, 1, 10), 5);
    for (const ParamRef& p : rs.params())
        if (p.react_coeff) CHECK(p.name.ends_with("/alpha"));
    bool saw = false;
    for (const ParamRef& p : rp.params())
        if (p.react_coeff) {
            CHECK_FALSE(p.name.ends_with("/alpha"));
            saw = true;
        }
    CHECK(saw);
}

TEST_CASE("BinConvNode: XNOR eval path equals the float training path") {
    std::mt19937_64 rng(41);
    std::bernoulli_distribution coin(0.5);
    BinConvNode node(8, 8, 3, 1, 1);
    node.binarize = true;
    std::normal_distribution<double> d(0.0, 1.0);
    for (double& v : node.w.data) v = d(rng);
    FloatTensor x({2, 8, 6, 6});
    for (double& v : x.data) v = coin(rng) ? 1.0 : -1.0;
    FloatTensor via_xnor = node.forward(x, ExecCtx{false, false});
    FloatTensor via_float = node.forward(x, ExecCtx{true, false});
    REQUIRE(via_xnor.shape == via_float.shape);
    for (size_t i = 0; i < via_xnor.data.size(); ++i)
        CHECK(via_xnor.data[i] == doctest::Approx(via_float.data[i]).epsilon(1e-12));
}

TEST_CASE("probe collects one sample set per sign site") {
    Network net(build_network("reactnet-a", Scale::Desk, 1, 10), 9);
    FloatTensor x = randn({2, 1, 32, 32}, 13);
    net.probe.enabled = true;
    net.forward(x, false);
    net.probe.enabled = false;
    int64_t binary_units = 0;
    for (const BlockSpec& b : net.spec().blocks) {
        if (b.kind == BlockKind::Normal) binary_units += 2;
        if (b.kind == BlockKind::Reduction) binary_units += 3;
    }
    CHECK(static_cast<int64_t>(net.probe.samples.size()) == binary_units);
    for (const auto& [site, vals] : net.probe.samples) CHECK_FALSE(vals.empty());
}

TEST_CASE("spec_to_text names the variant and block count") {
    NetworkSpec spec = build_network("reactnet-a", Scale::Desk);
    std::string txt = spec_to_text(spec);
    CHECK(txt.find("reactnet-a") != std::string::npos);
}
