// Acceptance suite: one PASS/FAIL line per criterion, exit 0 iff everything
// except explicitly waived checks passes. Waived checks still print FAIL.
//
// Needs the MNIST IDX files under $REACTNET_DATA/mnist (default /root/data).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "reactnet/arch.hpp"
#include "reactnet/bitkernel.hpp"
#include "reactnet/checkpoint.hpp"
#include "reactnet/dataset.hpp"
#include "reactnet/gradcheck.hpp"
#include "reactnet/layers.hpp"
#include "reactnet/opscount.hpp"
#include "reactnet/train.hpp"

using namespace reactnet;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "",
            bool waived = false) {
    std::printf("%s %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok && !waived) ++failures;
    std::fflush(stdout);
}

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// ---- criterion 1: kernel oracle ------------------------------------------------

FloatTensor conv_oracle(const FloatTensor& x, const FloatTensor& w, int64_t stride,
                        int64_t padding) {
    const ConvGeom g = conv_geometry(x.shape, w.shape[2], w.shape[3], stride, padding);
    std::vector<double> scale = compute_scale(w);
    FloatTensor out({g.batch, w.shape[0], g.out_h, g.out_w});
    for (int64_t n = 0; n < g.batch; ++n)
        for (int64_t o = 0; o < w.shape[0]; ++o)
            for (int64_t i = 0; i < g.out_h; ++i)
                for (int64_t j = 0; j < g.out_w; ++j) {
                    double acc = 0.0;
                    for (int64_t c = 0; c < g.in_ch; ++c)
                        for (int64_t kh = 0; kh < g.k_h; ++kh)
                            for (int64_t kw = 0; kw < g.k_w; ++kw) {
                                const int64_t ih = i * stride + kh - padding;
                                const int64_t iw = j * stride + kw - padding;
                                const double xv =
                                    (ih < 0 || ih >= g.in_h || iw < 0 || iw >= g.in_w)
                                        ? -1.0
                                        : x.at(n, c, ih, iw);
                                acc += xv * (w.at(o, c, kh, kw) >= 0.0 ? 1.0 : -1.0);
                            }
                    out.at(n, o, i, j) = scale[static_cast<size_t>(o)] * acc;
                }
    return out;
}

void criterion1() {
    const double t0 = now_s();
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int64_t> d_n(1, 2), d_c(1, 3), d_hw(3, 7), d_o(1, 3);
    std::uniform_int_distribution<int64_t> d_k(0, 1), d_s(1, 2), d_p(0, 2);
    std::bernoulli_distribution coin(0.5);
    std::normal_distribution<double> wdist(0.0, 1.0);
    double max_err = 0.0;
    int64_t cases = 0;
    for (int iter = 0; iter < 10000; ++iter) {
        const int64_t k = d_k(rng) == 0 ? 1 : 3;
        FloatTensor x({d_n(rng), d_c(rng), d_hw(rng), d_hw(rng)});
        for (double& v : x.data) v = coin(rng) ? 1.0 : -1.0;
        FloatTensor w({d_o(rng), x.shape[1], k, k});
        for (double& v : w.data) v = wdist(rng);
        const int64_t stride = d_s(rng), padding = d_p(rng);
        FloatTensor got =
            binary_conv2d(pack(x), BinaryConvParams::from_real(w), stride, padding);
        FloatTensor ref = conv_oracle(x, w, stride, padding);
        for (size_t i = 0; i < got.data.size(); ++i)
            max_err = std::max(max_err, std::abs(got.data[i] - ref.data[i]));
        ++cases;
    }
    const double dt = now_s() - t0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%lld cases, max |err| = %.2e, %.1fs",
                  static_cast<long long>(cases), max_err, dt);
    report("criterion 1: kernel oracle equivalence (<= 1e-9)",
           max_err <= 1e-9 && dt <= 120.0, buf);
}

// ---- criterion 2: gradient suite -------------------------------------------------

void criterion2() {
    const double t0 = now_s();
    std::vector<GradCheckResult> r = run_grad_checks(1);
    bool ok = all_passed(r);
    double worst = 0.0;
    for (const GradCheckResult& g : r) worst = std::max(worst, g.max_rel_err / g.tolerance);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu checks, worst err/tol = %.2e, %.1fs", r.size(),
                  worst, now_s() - t0);
    report("criterion 2: finite-difference gradient suite", ok, buf);
}

// ---- criterion 3: Table 1 ----------------------------------------------------------

bool within(double got, double want, double tol) {
    return std::abs(got - want) <= tol * want;
}

void criterion3() {
    OpsReport a = count_ops(build_network("reactnet-a", Scale::Paper));
    report("criterion 3a: ReActNet-A BOPs within 2% of 4.82e9",
           within(static_cast<double>(a.total_bops), 4.82e9, 0.02),
           "got " + std::to_string(a.total_bops));
    report("criterion 3a: ReActNet-A FLOPs within 10% of 0.12e8",
           within(static_cast<double>(a.total_flops), 0.12e8, 0.10),
           "got " + std::to_string(a.total_flops));
    report("criterion 3a: ReActNet-A OPs within 3% of 0.87e8",
           within(a.total_ops, 0.87e8, 0.03), "got " + std::to_string(a.total_ops));

    OpsReport c = count_ops(build_network("reactnet-c", Scale::Paper));
    report("criterion 3b: ReActNet-C OPs within 3% of 2.14e8",
           within(c.total_ops, 2.14e8, 0.03), "got " + std::to_string(c.total_ops));

    // The B row of Table 1 is internally inconsistent: its own columns give
    // 4.69e9/64 + 0.44e8 = 1.17e8, not the printed 1.63e8. The counter
    // reproduces the columns (checked below), so the OPs total is waived.
    OpsReport b = count_ops(build_network("reactnet-b", Scale::Paper));
    report("criterion 3c: ReActNet-B OPs within 10% of 1.63e8",
           within(b.total_ops, 1.63e8, 0.10),
           "got " + std::to_string(b.total_ops) +
               " (waived: Table 1 B row inconsistent with its own BOPs/FLOPs columns)",
           /*waived=*/true);
    report("criterion 3c': ReActNet-B BOPs/FLOPs match Table 1 columns (4.69e9 / 0.44e8)",
           within(static_cast<double>(b.total_bops), 4.69e9, 0.02) &&
               within(static_cast<double>(b.total_flops), 0.44e8, 0.10),
           "got " + std::to_string(b.total_bops) + " / " + std::to_string(b.total_flops));
}

// ---- criterion 4: desk-scale training -----------------------------------------------

std::string data_root() {
    const char* env = std::getenv("REACTNET_DATA");
    return env ? env : "/root/data";
}

struct Splits {
    Dataset train, test;
};

Splits load_mnist_splits() {
    const std::string dir = data_root() + "/mnist";
    Splits s;
    s.train = load_mnist(dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte");
    s.test = load_mnist(dir + "/t10k-images-idx3-ubyte", dir + "/t10k-labels-idx1-ubyte");
    s.train.compute_normalization();
    s.test.adopt_normalization(s.train);
    return s;
}

TrainConfig ablation_config(const std::string& variant, uint64_t seed,
                            const std::string& out_dir, const std::string& objective,
                            const std::string& teacher) {
    TrainConfig cfg;
    cfg.variant = variant;
    cfg.objective = objective;
    cfg.teacher_checkpoint = teacher;
    cfg.out_dir = out_dir;
    cfg.steps = 150;
    cfg.batch_size = 24;
    cfg.initial_lr = 2e-3;
    cfg.seed = seed;
    cfg.train_limit = 4000;
    cfg.eval_limit = 2000;
    cfg.eval_every = 0;
    return cfg;
}

void criterion4(const Splits& data, const std::string& work) {
    const double t0 = now_s();

    // 4a: full two-step run, teacher first
    TrainConfig tcfg;
    tcfg.variant = "real";
    tcfg.objective = "ce";
    tcfg.out_dir = work;
    tcfg.steps = 350;
    tcfg.batch_size = 32;
    tcfg.initial_lr = 1e-3;
    tcfg.seed = 1;
    tcfg.train_limit = 20000;
    tcfg.eval_limit = 0;  // full test set
    tcfg.eval_every = 0;
    TrainOutcome teacher = train_teacher(tcfg, data.train, data.test);

    TrainConfig rcfg = tcfg;
    rcfg.variant = "reactnet-a";
    rcfg.objective = "distributional";
    rcfg.teacher_checkpoint = teacher.checkpoint_path;
    rcfg.steps = 500;
    rcfg.train_limit = 0;
    TrainOutcome react = train_two_step(rcfg, data.train, data.test);

    char buf[200];
    std::snprintf(buf, sizeof buf, "react %.4f, teacher %.4f, %.0fs",
                  react.test_accuracy, teacher.test_accuracy, now_s() - t0);
    report("criterion 4a: two-step ReActNet >= 95% on MNIST, teacher strictly higher",
           react.test_accuracy >= 0.95 && teacher.test_accuracy > react.test_accuracy, buf);

    // 4b/4c: directional ablations over 3 seeds on a reduced desk task
    std::map<std::string, double> mean_acc;
    auto run3 = [&](const std::string& key, const std::string& variant,
                    const std::string& objective) {
        double sum = 0.0;
        for (uint64_t seed : {11ull, 12ull, 13ull}) {
            TrainConfig cfg = ablation_config(variant, seed, work + "/" + key, objective,
                                              teacher.checkpoint_path);
            std::filesystem::create_directories(cfg.out_dir);
            sum += train_two_step(cfg, data.train, data.test).test_accuracy;
        }
        mean_acc[key] = sum / 3.0;
        std::printf("  ablation %-16s mean accuracy %.4f\n", key.c_str(), mean_acc[key]);
        std::fflush(stdout);
    };
    run3("baseline", "baseline", "distributional");
    run3("rsign-only", "rsign-only", "distributional");
    run3("rprelu-only", "rprelu-only", "distributional");
    run3("react", "reactnet-a", "distributional");
    run3("react-ce", "reactnet-a", "ce");
    run3("direct-down", "baseline-direct", "distributional");

    report("criterion 4b: baseline <= +RSign", mean_acc["baseline"] <= mean_acc["rsign-only"]);
    report("criterion 4b: baseline <= +RPReLU",
           mean_acc["baseline"] <= mean_acc["rprelu-only"]);
    report("criterion 4b: baseline <= ReAct(both)", mean_acc["baseline"] <= mean_acc["react"]);
    report("criterion 4b: distributional >= CE", mean_acc["react"] >= mean_acc["react-ce"]);
    report("criterion 4c: concat downsample >= direct binarized downsample",
           mean_acc["baseline"] >= mean_acc["direct-down"]);
}

// ---- criterion 5: structural invariants -------------------------------------------

void criterion5() {
    bool walk = true;
    for (const char* v : {"baseline", "reactnet-a", "reactnet-b", "reactnet-c",
                          "rsign-only", "rprelu-only", "real"})
        for (Scale s : {Scale::Desk, Scale::Paper})
            walk = walk && check_channel_invariant(build_network(v, s));
    report("criterion 5: equal-in/out-channel walk on every variant", walk);

    Network react(build_network("reactnet-a", Scale::Desk, 1, 10), 5);
    Network base(build_network("baseline", Scale::Desk, 1, 10), 5);
    std::map<std::string, std::vector<double>*> rp;
    for (ParamRef& p : react.params()) rp[p.name] = p.value;
    for (ParamRef& p : base.params())
        if (rp.count(p.name)) *p.value = *rp[p.name];
    FloatTensor x({2, 1, 32, 32});
    std::mt19937_64 rng(6);
    std::normal_distribution<double> d(0.0, 1.0);
    for (double& v : x.data) v = d(rng);
    report("criterion 5: ReAct-at-init forward equals baseline bitwise",
           react.forward(x, false).data == base.forward(x, false).data);

    int64_t coeffs = 0, pairs = 0;
    for (const ParamRef& p : react.params())
        if (p.react_coeff) coeffs += static_cast<int64_t>(p.value->size());
    for (const BlockSpec& b : react.spec().blocks) {
        if (b.kind == BlockKind::Normal) pairs += 2 * b.out_ch;
        if (b.kind == BlockKind::Reduction) pairs += 3 * b.in_ch;
    }
    report("criterion 5: ReAct overhead is exactly 4 x channels per pair",
           coeffs == 4 * pairs,
           std::to_string(coeffs) + " coefficients for " + std::to_string(pairs) +
               " pair-channels");
}

// ---- criterion 6/7: serialization and determinism ------------------------------------

std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void criterion6(const std::string& work) {
    Network net(build_network("reactnet-a", Scale::Desk, 1, 10), 21);
    FloatTensor x({2, 1, 32, 32});
    std::mt19937_64 rng(22);
    std::normal_distribution<double> d(0.0, 1.0);
    for (double& v : x.data) v = d(rng);
    FloatTensor before = net.forward(x, false);

    const std::string p1 = work + "/c6_a.ckpt", p2 = work + "/c6_b.ckpt";
    save_checkpoint(network_to_checkpoint(net, Scale::Desk, nullptr, 0, ""), p1);
    Network back = network_from_checkpoint(load_checkpoint(p1));
    save_checkpoint(network_to_checkpoint(back, Scale::Desk, nullptr, 0, ""), p2);
    report("criterion 6: checkpoint round-trip byte-identical",
           file_bytes(p1) == file_bytes(p2));
    report("criterion 6: loaded model reproduces logits bit-exactly",
           back.forward(x, false).data == before.data);
}

void criterion7(const Splits& data, const std::string& work) {
    auto run = [&](const std::string& out) {
        TrainConfig cfg = ablation_config("reactnet-a", 4, out, "ce", "");
        cfg.steps = 40;
        cfg.train_limit = 1200;
        cfg.eval_limit = 200;
        std::filesystem::create_directories(cfg.out_dir);
        return train_two_step(cfg, data.train, data.test);
    };
    TrainOutcome a = run(work + "/det_a");
    TrainOutcome b = run(work + "/det_b");
    report("criterion 7: identical seed + config give identical checkpoints",
           file_bytes(a.checkpoint_path) == file_bytes(b.checkpoint_path));
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion5();

    const std::string work = "/tmp/reactnet_acceptance";
    std::filesystem::create_directories(work);
    criterion6(work);

    try {
        Splits data = load_mnist_splits();
        criterion7(data, work);
        criterion4(data, work);
    } catch (const std::exception& e) {
        report("criterion 4/7: MNIST available", false, e.what());
    }

    std::printf("%s (%d failing)\n", failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                failures);
    return failures == 0 ? 0 : 1;
}
