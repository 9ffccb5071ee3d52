#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "reactnet/tensor.hpp"

namespace reactnet {

// Images kept as raw bytes; normalization constants come from the training
// split and are applied at batch-assembly time.
struct Dataset {
    int64_t count = 0, channels = 0, height = 0, width = 0;
    std::vector<uint8_t> pixels;  // count*channels*height*width
    std::vector<int> labels;
    std::vector<double> mean, stddev;  // per channel, in [0,1] pixel units

    // Assemble a normalized NCHW batch, padding the spatial dims up to
    // (out_h, out_w) with normalized black (raw pixel 0). Optional
    // augmentation: random crop from a 4-pixel pad plus horizontal flip.
    FloatTensor make_batch(const std::vector<int64_t>& indices, int64_t out_h, int64_t out_w,
                           bool augment = false, std::mt19937_64* rng = nullptr) const;
    std::vector<int> batch_labels(const std::vector<int64_t>& indices) const;

    void compute_normalization();
    void adopt_normalization(const Dataset& train) {
        mean = train.mean;
        stddev = train.stddev;
    }
};

// IDX-format MNIST pair (big-endian headers, magics 0x803 / 0x801).
Dataset load_mnist(const std::string& images_path, const std::string& labels_path);

// CIFAR-10 binary batch files: 3073-byte records, label byte + 3072 RGB bytes.
Dataset load_cifar10(const std::vector<std::string>& batch_paths);

}  // namespace reactnet
