#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "reactnet/arch.hpp"
#include "reactnet/checkpoint.hpp"
#include "reactnet/dataset.hpp"
#include "reactnet/optim.hpp"

namespace reactnet {

struct TrainConfig {
    std::string variant = "reactnet-a";
    std::string dataset = "mnist";  // mnist | cifar10
    std::string dataset_dir;
    std::string teacher_checkpoint;
    std::string out_dir = ".";
    std::string objective = "distributional";  // distributional | ce
    int64_t steps = -1;        // optimizer steps per phase; -1 derives from epochs
    int64_t epochs = 2;        // per phase, used when steps == -1
    int64_t batch_size = 50;
    double initial_lr = 5e-4;
    double lr_step2 = 0.0;     // 0 = reuse initial_lr for step 2
    int64_t steps_step2 = -1;  // -1 = same as step 1
    int64_t batch_size_step2 = 0;  // 0 = reuse batch_size for step 2
    std::string resume_step1;  // checkpoint to restore instead of running step 1
    double weight_decay_step1 = 1e-5;
    double weight_decay_step2 = 0.0;
    uint64_t seed = 1;
    int64_t train_limit = 0;   // restrict to the first N examples (0 = all)
    int64_t eval_limit = 0;
    int64_t eval_every = 200;  // steps between eval_acc entries in the CSV
    bool augment = false;      // random crop + flip (CIFAR-10 only)

    static TrainConfig from_file(const std::string& path);  // flat key=value text
    void apply_kv(const std::string& key, const std::string& value);
};

// Checkpoint <-> network state. The checkpoint additionally carries the
// metadata needed to rebuild the network (variant, scale, shapes) plus
// optimizer state, step counter and RNG state.
Checkpoint network_to_checkpoint(Network& net, Scale scale, const AdamOptimizer* opt,
                                 int64_t step, const std::string& rng_state);
void checkpoint_to_network(const Checkpoint& c, Network& net);
Network network_from_checkpoint(const Checkpoint& c);
Scale checkpoint_scale(const Checkpoint& c);

// Top-1 accuracy in eval mode over at most `limit` examples (0 = all).
double evaluate(Network& net, const Dataset& data, int64_t batch_size, int64_t limit,
                int64_t in_h, int64_t in_w);

struct TrainOutcome {
    double test_accuracy = 0.0;
    std::string checkpoint_path;
};

// Real-valued counterpart network trained with cross-entropy.
TrainOutcome train_teacher(const TrainConfig& cfg, const Dataset& train, const Dataset& test);

// Two-step schedule: step 1 binary activations + real weights, step 2 inherits
// and binarizes weights too. Both steps use the configured objective.
TrainOutcome train_two_step(const TrainConfig& cfg, const Dataset& train, const Dataset& test);

}  // namespace reactnet
