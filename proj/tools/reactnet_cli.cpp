// reactnet command-line entry point: train / eval / count-ops / grad-check / inspect.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reactnet/arch.hpp"
#include "reactnet/checkpoint.hpp"
#include "reactnet/dataset.hpp"
#include "reactnet/gradcheck.hpp"
#include "reactnet/opscount.hpp"
#include "reactnet/train.hpp"

namespace {

using namespace reactnet;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::pair<Dataset, Dataset> load_splits(const std::string& dataset, const std::string& dir) {
    if (dir.empty()) throw UsageError("missing dataset path (--data-dir)");
    Dataset train, test;
    if (dataset == "mnist") {
        train = load_mnist(dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte");
        test = load_mnist(dir + "/t10k-images-idx3-ubyte", dir + "/t10k-labels-idx1-ubyte");
    } else if (dataset == "cifar10") {
        std::vector<std::string> batches;
        for (int i = 1; i <= 5; ++i)
            batches.push_back(dir + "/data_batch_" + std::to_string(i) + ".bin");
        train = load_cifar10(batches);
        test = load_cifar10({dir + "/test_batch.bin"});
    } else {
        throw UsageError("unknown dataset: " + dataset);
    }
    train.compute_normalization();
    test.adopt_normalization(train);
    return {std::move(train), std::move(test)};
}

int cmd_train(const TrainConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    if (cfg.steps == 0) {
        // write the untrained starting point and stop
        NetworkSpec spec = build_network(cfg.variant, Scale::Desk,
                                         cfg.dataset == "cifar10" ? 3 : 1, 10);
        Network net(spec, cfg.seed);
        if (cfg.variant != "real") net.set_binarize_weights(false);  // step-1 state
        const std::string path = cfg.out_dir + "/" + cfg.variant + ".ckpt";
        save_checkpoint(network_to_checkpoint(net, Scale::Desk, nullptr, 0, ""), path);
        std::ofstream csv(cfg.out_dir + "/metrics.csv");
        csv << "step,lr,loss,eval_acc\n";
        std::cout << "wrote initial checkpoint " << path << "\n";
        return 0;
    }
    auto [train, test] = load_splits(cfg.dataset, cfg.dataset_dir);
    TrainOutcome out = cfg.variant == "real" ? train_teacher(cfg, train, test)
                                             : train_two_step(cfg, train, test);
    std::cout << "checkpoint " << out.checkpoint_path << "\n";
    std::printf("test_accuracy %.4f\n", out.test_accuracy);
    return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& dataset,
             const std::string& dir, const std::string& split, int64_t limit) {
    Network net = network_from_checkpoint(load_checkpoint(ckpt_path));
    auto [train, test] = load_splits(dataset, dir);
    const Dataset& d = split == "train" ? train : test;
    const double acc = evaluate(net, d, 100, limit, net.spec().input_shape[1],
                                net.spec().input_shape[2]);
    std::printf("top1_accuracy %.4f\n", acc);
    return 0;
}

int cmd_count_ops(const std::string& variant, int64_t input_size) {
    NetworkSpec spec = build_network(variant, input_size <= 64 ? Scale::Desk : Scale::Paper);
    if (input_size > 0) {
        spec.input_shape[1] = input_size;
        spec.input_shape[2] = input_size;
    }
    OpsReport r = count_ops(spec);
    std::cout << r.to_text();
    std::printf("BOPS=%lld FLOPS=%lld OPS=%.10g\n", static_cast<long long>(r.total_bops),
                static_cast<long long>(r.total_flops), r.total_ops);
    return 0;
}

int cmd_grad_check(uint64_t seed) {
    bool ok = true;
    for (const GradCheckResult& r : run_grad_checks(seed)) {
        std::printf("%-24s max_rel_err=%.3e tol=%.0e %s\n", r.name.c_str(), r.max_rel_err,
                    r.tolerance, r.passed ? "pass" : "FAIL");
        ok = ok && r.passed;
    }
    return ok ? 0 : 1;
}

int cmd_inspect(const std::string& ckpt_path, const std::string& hist_path,
                const std::string& dataset, const std::string& dir, uint64_t seed) {
    Network net = network_from_checkpoint(load_checkpoint(ckpt_path));

    for (const ParamRef& p : net.params()) {
        if (!p.react_coeff) continue;
        const std::vector<double>& v = *p.value;
        double lo = v[0], hi = v[0], sum = 0.0;
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
            sum += x;
        }
        std::printf("%-24s min=%+.6f max=%+.6f mean=%+.6f\n", p.name.c_str(), lo, hi,
                    sum / static_cast<double>(v.size()));
    }

    // activation histograms at every sign site, from a real batch when a
    // dataset is given and from seeded noise otherwise
    const auto& in = net.spec().input_shape;
    FloatTensor x({16, in[0], in[1], in[2]});
    if (!dir.empty()) {
        auto [train, test] = load_splits(dataset, dir);
        std::vector<int64_t> idx(16);
        for (int64_t i = 0; i < 16; ++i) idx[static_cast<size_t>(i)] = i;
        x = test.make_batch(idx, in[1], in[2]);
    } else {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> d(0.0, 1.0);
        for (double& v : x.data) v = d(rng);
    }
    net.probe.enabled = true;
    net.forward(x, /*training=*/false);
    net.probe.enabled = false;

    std::ofstream csv(hist_path);
    if (!csv) throw std::runtime_error("cannot write " + hist_path);
    csv << "site,bin_lo,bin_hi,count\n";
    constexpr int kBins = 64;
    for (const auto& [site, values] : net.probe.samples) {
        double lo = *std::min_element(values.begin(), values.end());
        double hi = *std::max_element(values.begin(), values.end());
        if (hi <= lo) hi = lo + 1.0;
        const double w = (hi - lo) / kBins;
        std::vector<int64_t> counts(kBins, 0);
        for (double v : values) {
            int b = static_cast<int>((v - lo) / w);
            counts[static_cast<size_t>(std::clamp(b, 0, kBins - 1))]++;
        }
        for (int b = 0; b < kBins; ++b)
            csv << site << "," << lo + b * w << "," << lo + (b + 1) * w << "," << counts[b]
                << "\n";
    }
    std::cout << "histograms " << hist_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"binary neural network engine"};
    app.require_subcommand(1);

    TrainConfig cfg;
    std::string config_path;
    auto* train = app.add_subcommand("train", "train a variant (two-step schedule)");
    train->add_option("--config", config_path, "flat key=value config file");
    train->add_option("--variant", cfg.variant);
    train->add_option("--dataset", cfg.dataset);
    train->add_option("--data-dir", cfg.dataset_dir);
    train->add_option("--teacher", cfg.teacher_checkpoint);
    train->add_option("--objective", cfg.objective);
    train->add_option("--out", cfg.out_dir);
    train->add_option("--steps", cfg.steps);
    train->add_option("--epochs", cfg.epochs);
    train->add_option("--batch-size", cfg.batch_size);
    train->add_option("--lr", cfg.initial_lr);
    train->add_option("--lr2", cfg.lr_step2);
    train->add_option("--steps2", cfg.steps_step2);
    train->add_option("--batch-size2", cfg.batch_size_step2);
    train->add_option("--resume-step1", cfg.resume_step1);
    train->add_option("--seed", cfg.seed);
    train->add_option("--train-limit", cfg.train_limit);
    train->add_option("--eval-limit", cfg.eval_limit);
    train->add_option("--eval-every", cfg.eval_every);
    train->add_flag("--augment", cfg.augment);

    std::string ckpt, split = "test", dataset = "mnist", data_dir;
    int64_t limit = 0;
    auto* eval = app.add_subcommand("eval", "top-1 accuracy of a checkpoint");
    eval->add_option("--checkpoint", ckpt)->required();
    eval->add_option("--dataset", dataset);
    eval->add_option("--data-dir", data_dir);
    eval->add_option("--split", split)->check(CLI::IsMember({"train", "test"}));
    eval->add_option("--limit", limit);

    std::string ops_variant = "reactnet-a";
    int64_t input_size = 224;
    auto* ops = app.add_subcommand("count-ops", "static BOPs/FLOPs accounting");
    ops->add_option("--variant", ops_variant);
    ops->add_option("--input-size", input_size);

    uint64_t gc_seed = 1;
    auto* gc = app.add_subcommand("grad-check", "finite-difference gradient suite");
    gc->add_option("--seed", gc_seed);

    std::string hist_path = "activations_hist.csv";
    uint64_t inspect_seed = 1;
    auto* inspect = app.add_subcommand("inspect", "coefficient summaries + histograms");
    inspect->add_option("--checkpoint", ckpt)->required();
    inspect->add_option("--hist-out", hist_path);
    inspect->add_option("--dataset", dataset);
    inspect->add_option("--data-dir", data_dir);
    inspect->add_option("--seed", inspect_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (train->parsed()) {
            if (!config_path.empty()) {
                // config file supplies anything not set on the command line
                TrainConfig f = TrainConfig::from_file(config_path);
                auto unset = [&](const char* name) { return train->count(name) == 0; };
                if (unset("--variant")) cfg.variant = f.variant;
                if (unset("--dataset")) cfg.dataset = f.dataset;
                if (unset("--data-dir")) cfg.dataset_dir = f.dataset_dir;
                if (unset("--teacher")) cfg.teacher_checkpoint = f.teacher_checkpoint;
                if (unset("--objective")) cfg.objective = f.objective;
                if (unset("--out")) cfg.out_dir = f.out_dir;
                if (unset("--steps")) cfg.steps = f.steps;
                if (unset("--epochs")) cfg.epochs = f.epochs;
                if (unset("--batch-size")) cfg.batch_size = f.batch_size;
                if (unset("--lr")) cfg.initial_lr = f.initial_lr;
                if (unset("--lr2")) cfg.lr_step2 = f.lr_step2;
                if (unset("--steps2")) cfg.steps_step2 = f.steps_step2;
                if (unset("--batch-size2")) cfg.batch_size_step2 = f.batch_size_step2;
                if (unset("--resume-step1")) cfg.resume_step1 = f.resume_step1;
                if (unset("--seed")) cfg.seed = f.seed;
                if (unset("--train-limit")) cfg.train_limit = f.train_limit;
                if (unset("--eval-limit")) cfg.eval_limit = f.eval_limit;
                if (unset("--eval-every")) cfg.eval_every = f.eval_every;
                if (unset("--augment")) cfg.augment = f.augment;
            }
            if (cfg.dataset_dir.empty() && cfg.steps != 0)
                throw UsageError("missing dataset path (--data-dir or dataset_dir=...)");
            return cmd_train(cfg);
        }
        if (eval->parsed()) return cmd_eval(ckpt, dataset, data_dir, split, limit);
        if (ops->parsed()) return cmd_count_ops(ops_variant, input_size);
        if (gc->parsed()) return cmd_grad_check(gc_seed);
        if (inspect->parsed())
            return cmd_inspect(ckpt, hist_path, dataset, data_dir, inspect_seed);
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
