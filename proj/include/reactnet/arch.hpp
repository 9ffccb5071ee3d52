#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "reactnet/activations.hpp"
#include "reactnet/bitkernel.hpp"
#include "reactnet/layers.hpp"
#include "reactnet/tensor.hpp"

namespace reactnet {

enum class BlockKind { Stem, Normal, Reduction, Classifier };

// Downsampling stage of a reduction block.
enum class DownFlavor {
    ConcatBinary,  // two parallel 1x1 binary convs with identity shortcuts, concatenated
    BinaryDirect,  // single 1x1 binary conv C -> 2C, no shortcut
    RealGroup4,    // single real 1x1 conv C -> 2C, 4 groups
    RealFull,      // single real 1x1 conv C -> 2C
};

struct BlockSpec {
    BlockKind kind;
    int64_t in_ch = 0;
    int64_t out_ch = 0;
    int64_t stride = 1;  // stride of the 3x3 stage (or of the stem conv)
};

struct NetworkSpec {
    std::vector<BlockSpec> blocks;
    std::vector<int64_t> input_shape;  // {C, H, W}
    int64_t num_classes = 10;
    std::string variant;  // tag, e.g. "reactnet-a"
    bool use_rsign = false;
    bool use_rprelu = false;
    bool real_network = false;  // real-valued counterpart (teacher)
    DownFlavor down = DownFlavor::ConcatBinary;
};

enum class Scale { Desk, Paper };

// Known variant tags: baseline, reactnet (alias reactnet-a), reactnet-b,
// reactnet-c, rsign-only, rprelu-only, baseline-direct, real.
NetworkSpec build_network(const std::string& variant, Scale scale,
                          int64_t input_channels = -1, int64_t num_classes = -1);

// Every 1-bit convolution must have equal input and output channel counts.
bool check_channel_invariant(const NetworkSpec& spec);

std::string spec_to_text(const NetworkSpec& spec);

struct ParamRef {
    std::string name;
    std::vector<double>* value;
    std::vector<double>* grad;
    bool weight_decay;  // latent/real conv and FC weights only
    bool clip_latent;   // binary-path latent weights, clipped to [-1.05, 1.05]
    bool react_coeff;   // alpha/beta/gamma/zeta of ReAct activations
};

struct ExecCtx {
    bool training = false;
    bool smooth = false;  // replace quantizers by their differentiable surrogates
};

// ---- engine nodes (exposed for tests) ----------------------------------------

struct SignNode {
    RSignParams p;
    bool learnable = false;
    std::vector<double> grad_alpha;
    FloatTensor x_cache;
    bool smooth_cache = false;

    explicit SignNode(int64_t channels, bool learn)
        : learnable(learn), grad_alpha(static_cast<size_t>(channels), 0.0) {
        p.alpha.assign(static_cast<size_t>(channels), 0.0);
    }
    FloatTensor forward(const FloatTensor& x, const ExecCtx& ctx);
    FloatTensor backward(const FloatTensor& upstream);
};

struct ActNode {  // RPReLU; plain PReLU is the frozen special case
    RPReLUParams p;
    bool learnable = false;
    std::vector<double> grad_beta, grad_gamma, grad_zeta;
    FloatTensor x_cache;

    explicit ActNode(int64_t channels, bool learn)
        : learnable(learn),
          grad_beta(static_cast<size_t>(channels), 0.0),
          grad_gamma(static_cast<size_t>(channels), 0.0),
          grad_zeta(static_cast<size_t>(channels), 0.0) {
        p.beta.assign(static_cast<size_t>(channels), 0.25);
        p.gamma.assign(static_cast<size_t>(channels), 0.0);
        p.zeta.assign(static_cast<size_t>(channels), 0.0);
    }
    FloatTensor forward(const FloatTensor& x, const ExecCtx& ctx);
    FloatTensor backward(const FloatTensor& upstream);
};

struct BinConvNode {
    FloatTensor w;  // latent OIHW
    std::vector<double> grad_w;
    bool binarize = false;  // false during step-1 training
    int64_t stride, padding;
    FloatTensor x_cache, w_eff_cache;
    bool smooth_cache = false;

    BinConvNode(int64_t out_ch, int64_t in_ch, int64_t k, int64_t stride_, int64_t pad_)
        : w({out_ch, in_ch, k, k}), grad_w(static_cast<size_t>(w.numel()), 0.0),
          stride(stride_), padding(pad_) {}
    FloatTensor forward(const FloatTensor& x, const ExecCtx& ctx);
    FloatTensor backward(const FloatTensor& upstream);
};

struct RealConvNode {
    FloatTensor w;
    std::vector<double> grad_w;
    int64_t stride, padding, groups;
    FloatTensor x_cache;

    RealConvNode(int64_t out_ch, int64_t in_ch_per_group, int64_t k_h, int64_t k_w,
                 int64_t stride_, int64_t pad_, int64_t groups_)
        : w({out_ch, in_ch_per_group, k_h, k_w}), grad_w(static_cast<size_t>(w.numel()), 0.0),
          stride(stride_), padding(pad_), groups(groups_) {}
    FloatTensor forward(const FloatTensor& x, const ExecCtx& ctx);
    FloatTensor backward(const FloatTensor& upstream);
};

struct BnNode {
    BatchNormParams p;
    std::vector<double> grad_gamma, grad_beta;
    BatchNormCache cache;

    explicit BnNode(int64_t channels)
        : p(channels),
          grad_gamma(static_cast<size_t>(channels), 0.0),
          grad_beta(static_cast<size_t>(channels), 0.0) {}
    FloatTensor forward(const FloatTensor& x, const ExecCtx& ctx);
    FloatTensor backward(const FloatTensor& upstream);
};

// activation -> conv -> BN -> (+ shortcut) -> activation. The shortcut taps the
// real-valued tensor entering the activation; stride-2 units pool it.
struct Unit {
    bool binary = true;
    bool has_shortcut = true;
    std::unique_ptr<SignNode> sign;      // binary units only
    std::unique_ptr<BinConvNode> bconv;  // -"-
    std::unique_ptr<RealConvNode> rconv;
    BnNode bn;
    ActNode act;
    std::vector<int64_t> x_shape_cache;
    bool pooled_cache = false;

    Unit(int64_t in_ch, int64_t out_ch, int64_t k, int64_t stride, bool binary_,
         bool shortcut, bool use_rsign, bool use_rprelu, int64_t groups = 1);
    FloatTensor forward(const FloatTensor& x, const ExecCtx& ctx);
    FloatTensor backward(const FloatTensor& upstream, const ExecCtx& ctx);
    void collect(std::vector<ParamRef>& out, const std::string& prefix);
};

struct Block {
    BlockKind kind;
    // stem
    std::unique_ptr<RealConvNode> stem_conv;
    std::unique_ptr<BnNode> stem_bn;
    std::unique_ptr<ActNode> stem_act;
    // normal / reduction
    std::unique_ptr<Unit> unit3;             // 3x3 stage
    std::unique_ptr<Unit> unit1;             // normal 1x1 stage
    std::unique_ptr<Unit> down_a, down_b;    // concat pair (or the single down unit in down_a)
    bool concat = false;
    // classifier
    std::unique_ptr<FloatTensor> fc_w;
    std::vector<double> fc_b, grad_fc_b;
    std::vector<double> grad_fc_w;
    std::vector<int64_t> gap_in_shape;
    FloatTensor fc_x_cache;
    FloatTensor concat_in_cache;

    FloatTensor forward(const FloatTensor& x, const ExecCtx& ctx);
    FloatTensor backward(const FloatTensor& upstream, const ExecCtx& ctx);
    void collect(std::vector<ParamRef>& out, const std::string& prefix);
};

// Activation histogram hook: site name -> values seen entering each RSign/Sign.
struct ActivationProbe {
    bool enabled = false;
    std::vector<std::pair<std::string, std::vector<double>>> samples;
};

class Network {
  public:
    Network(NetworkSpec spec, uint64_t seed);
    Network(const Network&) = delete;
    Network& operator=(const Network&) = delete;
    Network(Network&&) = default;
    Network& operator=(Network&&) = default;

    FloatTensor forward(const FloatTensor& x, bool training, bool smooth = false);
    FloatTensor backward(const FloatTensor& grad_logits);
    void zero_grads();

    std::vector<ParamRef> params();
    // Trainable parameters plus BN running statistics, in a stable order.
    std::vector<std::pair<std::string, std::vector<double>*>> state();
    // Every batch-norm parameter set in the graph (for stats recalibration).
    std::vector<BatchNormParams*> bn_params();
    const NetworkSpec& spec() const { return spec_; }
    void set_binarize_weights(bool on);
    bool binarize_weights() const { return binarize_; }

    // collects tensors entering every sign site of the next forward
    ActivationProbe probe;

  private:
    NetworkSpec spec_;
    std::vector<Block> blocks_;
    ExecCtx last_ctx_;
    bool binarize_ = true;
    friend struct Block;
};

}  // namespace reactnet
