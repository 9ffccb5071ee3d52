#include "reactnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "reactnet/layers.hpp"
#include "reactnet/loss.hpp"

namespace reactnet {

// ---- config ---------------------------------------------------------------------

void TrainConfig::apply_kv(const std::string& key, const std::string& value) {
    if (key == "variant") variant = value;
    else if (key == "dataset") dataset = value;
    else if (key == "dataset_dir") dataset_dir = value;
    else if (key == "teacher_checkpoint") teacher_checkpoint = value;
    else if (key == "out_dir") out_dir = value;
    else if (key == "objective") objective = value;
    else if (key == "steps") steps = std::stoll(value);
    else if (key == "epochs") epochs = std::stoll(value);
    else if (key == "batch_size") batch_size = std::stoll(value);
    else if (key == "initial_lr") initial_lr = std::stod(value);
    else if (key == "lr_step2") lr_step2 = std::stod(value);
    else if (key == "steps_step2") steps_step2 = std::stoll(value);
    else if (key == "batch_size_step2") batch_size_step2 = std::stoll(value);
    else if (key == "resume_step1") resume_step1 = value;
    else if (key == "weight_decay_step1") weight_decay_step1 = std::stod(value);
    else if (key == "weight_decay_step2") weight_decay_step2 = std::stod(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "train_limit") train_limit = std::stoll(value);
    else if (key == "eval_limit") eval_limit = std::stoll(value);
    else if (key == "eval_every") eval_every = std::stoll(value);
    else if (key == "augment") augment = value == "1" || value == "true";
    else throw std::invalid_argument("unknown config key: " + key);
}

TrainConfig TrainConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    TrainConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("bad config line (want key=value): " + line);
        cfg.apply_kv(line.substr(0, eq), line.substr(eq + 1));
    }
    return cfg;
}

// ---- checkpoint glue -------------------------------------------------------------

Checkpoint network_to_checkpoint(Network& net, Scale scale, const AdamOptimizer* opt,
                                 int64_t step, const std::string& rng_state) {
    Checkpoint c;
    for (auto& [name, vec] : net.state())
        c.put(name, {static_cast<int64_t>(vec->size())}, *vec);
    const NetworkSpec& s = net.spec();
    c.put_bytes("meta/variant", {s.variant.begin(), s.variant.end()});
    c.put_scalar("meta/scale", scale == Scale::Desk ? 0.0 : 1.0);
    c.put_scalar("meta/input_channels", static_cast<double>(s.input_shape[0]));
    c.put_scalar("meta/num_classes", static_cast<double>(s.num_classes));
    c.put_scalar("meta/binarize", net.binarize_weights() ? 1.0 : 0.0);
    c.put_scalar("meta/step", static_cast<double>(step));
    if (!rng_state.empty()) c.put_bytes("meta/rng", {rng_state.begin(), rng_state.end()});
    if (opt) {
        c.put_scalar("opt/t", static_cast<double>(opt->t));
        auto params = net.params();
        for (size_t i = 0; i < opt->m.size(); ++i) {
            c.put("opt/m/" + params[i].name,
                  {static_cast<int64_t>(opt->m[i].size())}, opt->m[i]);
            c.put("opt/v/" + params[i].name,
                  {static_cast<int64_t>(opt->v[i].size())}, opt->v[i]);
        }
    }
    return c;
}

void checkpoint_to_network(const Checkpoint& c, Network& net) {
    if (c.has("meta/variant")) {
        const auto& v = c.get("meta/variant").bytes;
        const std::string variant(v.begin(), v.end());
        if (variant != net.spec().variant)
            throw std::runtime_error("checkpoint variant '" + variant +
                                     "' does not match network variant '" + net.spec().variant +
                                     "'");
    }
    for (auto& [name, vec] : net.state()) {
        const Checkpoint::Entry& e = c.get(name);
        if (e.f64.size() != vec->size())
            throw std::runtime_error("checkpoint tensor " + name + " has wrong size");
        *vec = e.f64;
    }
}

Scale checkpoint_scale(const Checkpoint& c) {
    return c.scalar("meta/scale") == 0.0 ? Scale::Desk : Scale::Paper;
}

Network network_from_checkpoint(const Checkpoint& c) {
    const auto& v = c.get("meta/variant").bytes;
    const std::string variant(v.begin(), v.end());
    NetworkSpec spec = build_network(
        variant, checkpoint_scale(c), static_cast<int64_t>(c.scalar("meta/input_channels")),
        static_cast<int64_t>(c.scalar("meta/num_classes")));
    Network net(spec, /*seed=*/0);
    net.set_binarize_weights(c.scalar("meta/binarize") != 0.0);
    checkpoint_to_network(c, net);
    return net;
}

// ---- evaluation --------------------------------------------------------------------

double evaluate(Network& net, const Dataset& data, int64_t batch_size, int64_t limit,
                int64_t in_h, int64_t in_w) {
    const int64_t n = limit > 0 ? std::min(limit, data.count) : data.count;
    int64_t correct = 0;
    for (int64_t start = 0; start < n; start += batch_size) {
        const int64_t end = std::min(start + batch_size, n);
        std::vector<int64_t> idx(static_cast<size_t>(end - start));
        std::iota(idx.begin(), idx.end(), start);
        FloatTensor x = data.make_batch(idx, in_h, in_w);
        FloatTensor logits = net.forward(x, /*training=*/false);
        const int64_t k = logits.shape[1];
        for (int64_t i = 0; i < end - start; ++i) {
            const double* row = logits.data.data() + i * k;
            int64_t best = 0;
            for (int64_t j = 1; j < k; ++j)
                if (row[j] > row[best]) best = j;
            if (static_cast<int>(best) == data.labels[static_cast<size_t>(start + i)])
                ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

// ---- training ------------------------------------------------------------------------

namespace {

int64_t effective_count(const TrainConfig& cfg, const Dataset& train) {
    return cfg.train_limit > 0 ? std::min(cfg.train_limit, train.count) : train.count;
}

// One full optimization phase over the dataset with a linear LR decay.
// Replace the EMA-tracked batch-norm statistics with an exact average of batch
// statistics over a deterministic slice of the training set. The EMA lags the
// weights during training, and sign activations amplify even small statistics
// errors, so freshly trained networks evaluate poorly without this.
void recalibrate_bn(Network& net, const Dataset& train, int64_t limit, int64_t in_h,
                    int64_t in_w) {
    const int64_t n = limit > 0 ? std::min(limit, train.count) : train.count;
    const int64_t batch = std::min<int64_t>(128, n);
    const int64_t num_batches = std::min<int64_t>(16, (n + batch - 1) / batch);
    auto bns = net.bn_params();
    std::vector<double> saved_momentum;
    for (BatchNormParams* p : bns) saved_momentum.push_back(p->momentum);
    for (int64_t k = 0; k < num_batches; ++k) {
        // momentum 1/(k+1) turns the EMA into a cumulative average of batch stats
        for (BatchNormParams* p : bns) p->momentum = 1.0 / static_cast<double>(k + 1);
        const int64_t start = k * batch;
        const int64_t end = std::min(start + batch, n);
        std::vector<int64_t> idx(static_cast<size_t>(end - start));
        std::iota(idx.begin(), idx.end(), start);
        FloatTensor x = train.make_batch(idx, in_h, in_w);
        net.forward(x, /*training=*/true);
    }
    for (size_t i = 0; i < bns.size(); ++i) bns[i]->momentum = saved_momentum[i];
}

void run_phase(Network& net, Network* teacher, const Dataset& train, const Dataset& test,
               const TrainConfig& cfg, double weight_decay, int64_t total_steps,
               std::mt19937_64& rng, std::ofstream& csv, int64_t& global_step,
               AdamOptimizer& opt) {
    const int64_t n = effective_count(cfg, train);
    const int64_t in_h = net.spec().input_shape[1], in_w = net.spec().input_shape[2];
    std::vector<int64_t> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    auto params = net.params();

    int64_t step = 0;
    while (step < total_steps) {
        std::shuffle(order.begin(), order.end(), rng);
        for (int64_t start = 0; start < n && step < total_steps; start += cfg.batch_size) {
            const int64_t end = std::min(start + cfg.batch_size, n);
            std::vector<int64_t> idx(order.begin() + start, order.begin() + end);
            FloatTensor x = train.make_batch(idx, in_h, in_w, cfg.augment, &rng);
            std::vector<int> labels = train.batch_labels(idx);

            FloatTensor logits = net.forward(x, /*training=*/true);
            double loss;
            FloatTensor grad;
            if (cfg.objective == "distributional") {
                FloatTensor tprobs = softmax(teacher->forward(x, /*training=*/false));
                loss = distributional_loss(logits, tprobs);
                grad = distributional_loss_backward(logits, tprobs);
            } else if (cfg.objective == "ce") {
                loss = cross_entropy(logits, labels);
                grad = cross_entropy_backward(logits, labels);
            } else {
                throw std::invalid_argument("unknown objective: " + cfg.objective);
            }
            net.zero_grads();
            net.backward(grad);
            const double lr = linear_decay_lr(cfg.initial_lr, step, total_steps);
            opt.step(params, lr, weight_decay);
            ++step;
            ++global_step;
            if (csv.is_open()) {
                csv << global_step << "," << lr << "," << loss << ",";
                if (cfg.eval_every > 0 &&
                    (step % cfg.eval_every == 0 || step == total_steps)) {
                    recalibrate_bn(net, train, cfg.train_limit, in_h, in_w);
                    csv << evaluate(net, test, cfg.batch_size,
                                    cfg.eval_limit > 0 ? cfg.eval_limit : 2000, in_h, in_w)
                        << "\n"
                        << std::flush;
                } else {
                    csv << "\n";
                }
            }
        }
    }
    recalibrate_bn(net, train, cfg.train_limit, in_h, in_w);
}

int64_t phase_steps(const TrainConfig& cfg, const Dataset& train) {
    if (cfg.steps >= 0) return cfg.steps;
    const int64_t n = effective_count(cfg, train);
    const int64_t per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    return cfg.epochs * per_epoch;
}

std::string rng_to_string(const std::mt19937_64& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

}  // namespace

TrainOutcome train_teacher(const TrainConfig& cfg, const Dataset& train, const Dataset& test) {
    NetworkSpec spec = build_network("real", Scale::Desk, train.channels, 10);
    Network net(spec, cfg.seed);
    std::mt19937_64 rng(cfg.seed);
    AdamOptimizer opt;
    std::ofstream csv(cfg.out_dir + "/teacher_metrics.csv");
    csv << "step,lr,loss,eval_acc\n";
    int64_t global_step = 0;
    TrainConfig tc = cfg;
    tc.objective = "ce";
    run_phase(net, nullptr, train, test, tc, cfg.weight_decay_step1, phase_steps(tc, train),
              rng, csv, global_step, opt);
    TrainOutcome out;
    out.test_accuracy = evaluate(net, test, cfg.batch_size, cfg.eval_limit,
                                 spec.input_shape[1], spec.input_shape[2]);
    out.checkpoint_path = cfg.out_dir + "/teacher.ckpt";
    save_checkpoint(network_to_checkpoint(net, Scale::Desk, &opt, global_step,
                                          rng_to_string(rng)),
                    out.checkpoint_path);
    return out;
}

TrainOutcome train_two_step(const TrainConfig& cfg, const Dataset& train,
                            const Dataset& test) {
    std::unique_ptr<Network> teacher;
    if (cfg.objective == "distributional") {
        if (cfg.teacher_checkpoint.empty())
            throw std::runtime_error("distributional objective needs teacher_checkpoint");
        teacher = std::make_unique<Network>(
            network_from_checkpoint(load_checkpoint(cfg.teacher_checkpoint)));
    }

    NetworkSpec spec = build_network(cfg.variant, Scale::Desk, train.channels, 10);
    Network net(spec, cfg.seed);
    std::mt19937_64 rng(cfg.seed);
    std::ofstream csv(cfg.out_dir + "/metrics.csv");
    csv << "step,lr,loss,eval_acc\n";
    int64_t global_step = 0;
    const int64_t in_h = spec.input_shape[1], in_w = spec.input_shape[2];
    const int64_t total = phase_steps(cfg, train);

    // step 1: binary activations, real-valued weights
    net.set_binarize_weights(false);
    if (cfg.resume_step1.empty()) {
        AdamOptimizer opt1;
        run_phase(net, teacher.get(), train, test, cfg, cfg.weight_decay_step1, total, rng,
                  csv, global_step, opt1);
        save_checkpoint(network_to_checkpoint(net, Scale::Desk, nullptr, global_step,
                                              rng_to_string(rng)),
                        cfg.out_dir + "/" + cfg.variant + ".step1.ckpt");
    } else {
        checkpoint_to_network(load_checkpoint(cfg.resume_step1), net);
        global_step += total;
    }
    // step 2: inherit weights, binarize weights too, fresh optimizer
    net.set_binarize_weights(true);
    AdamOptimizer opt2;
    TrainConfig cfg2 = cfg;
    if (cfg.lr_step2 > 0.0) cfg2.initial_lr = cfg.lr_step2;
    if (cfg.batch_size_step2 > 0) cfg2.batch_size = cfg.batch_size_step2;
    const int64_t total2 = cfg.steps_step2 >= 0 ? cfg.steps_step2 : total;
    run_phase(net, teacher.get(), train, test, cfg2, cfg.weight_decay_step2, total2, rng, csv,
              global_step, opt2);

    TrainOutcome out;
    out.test_accuracy = evaluate(net, test, cfg.batch_size, cfg.eval_limit, in_h, in_w);
    out.checkpoint_path = cfg.out_dir + "/" + cfg.variant + ".ckpt";
    save_checkpoint(network_to_checkpoint(net, Scale::Desk, &opt2, global_step,
                                          rng_to_string(rng)),
                    out.checkpoint_path);
    return out;
}

}  // namespace reactnet
