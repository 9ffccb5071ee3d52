#include "reactnet/opscount.hpp"

#include <sstream>
#include <stdexcept>

namespace reactnet {

namespace {

LayerCost conv_cost(const std::string& id, bool binary, int64_t in_ch, int64_t out_ch,
                    int64_t k, int64_t out_h, int64_t out_w, int64_t groups = 1) {
    LayerCost c;
    c.id = id;
    c.type = binary ? "binary_conv" : "real_conv";
    const int64_t macs = in_ch / groups * k * k * out_ch * out_h * out_w;
    (binary ? c.bops : c.flops) = macs;
    return c;
}

}  // namespace

OpsReport count_ops(const NetworkSpec& spec) {
    if (spec.input_shape.size() != 3)
        throw std::invalid_argument("count_ops: spec needs a concrete input shape");
    OpsReport r;
    int64_t h = spec.input_shape[1], w = spec.input_shape[2];
    const bool real = spec.real_network;
    for (size_t i = 0; i < spec.blocks.size(); ++i) {
        const BlockSpec& b = spec.blocks[i];
        const std::string id = "block" + std::to_string(i);
        switch (b.kind) {
            case BlockKind::Stem:
                h = (h + 2 - 3) / b.stride + 1;
                w = (w + 2 - 3) / b.stride + 1;
                r.layers.push_back(conv_cost(id + "/stem", false, b.in_ch, b.out_ch, 3, h, w));
                break;
            case BlockKind::Normal:
                h = (h + 2 - 3) / b.stride + 1;
                w = (w + 2 - 3) / b.stride + 1;
                r.layers.push_back(conv_cost(id + "/u3", !real, b.in_ch, b.in_ch, 3, h, w));
                r.layers.push_back(conv_cost(id + "/u1", !real, b.in_ch, b.in_ch, 1, h, w));
                break;
            case BlockKind::Reduction: {
                h = (h + 2 - 3) / b.stride + 1;
                w = (w + 2 - 3) / b.stride + 1;
                r.layers.push_back(conv_cost(id + "/u3", !real, b.in_ch, b.in_ch, 3, h, w));
                if (real || spec.down == DownFlavor::ConcatBinary) {
                    r.layers.push_back(conv_cost(id + "/da", !real, b.in_ch, b.in_ch, 1, h, w));
                    r.layers.push_back(conv_cost(id + "/db", !real, b.in_ch, b.in_ch, 1, h, w));
                } else if (spec.down == DownFlavor::BinaryDirect) {
                    r.layers.push_back(conv_cost(id + "/da", true, b.in_ch, b.out_ch, 1, h, w));
                } else {
                    const int64_t groups = spec.down == DownFlavor::RealGroup4 ? 4 : 1;
                    r.layers.push_back(
                        conv_cost(id + "/da", false, b.in_ch, b.out_ch, 1, h, w, groups));
                }
                break;
            }
            case BlockKind::Classifier: {
                LayerCost c;
                c.id = id + "/fc";
                c.type = "fc";
                c.flops = b.in_ch * b.out_ch;
                r.layers.push_back(c);
                break;
            }
        }
    }
    for (const LayerCost& c : r.layers) {
        r.total_bops += c.bops;
        r.total_flops += c.flops;
    }
    r.total_ops = static_cast<double>(r.total_bops) / 64.0 +
                  static_cast<double>(r.total_flops);
    return r;
}

std::string OpsReport::to_text() const {
    std::ostringstream os;
    for (const LayerCost& c : layers)
        os << c.id << " [" << c.type << "] bops=" << c.bops << " flops=" << c.flops << "\n";
    os << "BOPS=" << total_bops << " FLOPS=" << total_flops << " OPS=" << total_ops << "\n";
    return os.str();
}

std::string OpsReport::to_kv_lines() const {
    std::ostringstream os;
    for (const LayerCost& c : layers)
        os << "id=" << c.id << " type=" << c.type << " bops=" << c.bops
           << " flops=" << c.flops << "\n";
    return os.str();
}

}  // namespace reactnet
