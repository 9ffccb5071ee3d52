#pragma once

#include <string>
#include <vector>

#include "reactnet/arch.hpp"

namespace reactnet {

struct LayerCost {
    std::string id;
    std::string type;  // binary_conv | real_conv | fc
    int64_t bops = 0;
    int64_t flops = 0;
};

struct OpsReport {
    std::vector<LayerCost> layers;
    int64_t total_bops = 0;
    int64_t total_flops = 0;
    double total_ops = 0.0;  // BOPs/64 + FLOPs

    std::string to_text() const;       // human-readable table
    std::string to_kv_lines() const;   // id type bops flops, one layer per line
};

// Static accounting over the spec. One multiply-accumulate counts as one
// operation; BN, pooling and activations count as zero.
OpsReport count_ops(const NetworkSpec& spec);

}  // namespace reactnet
