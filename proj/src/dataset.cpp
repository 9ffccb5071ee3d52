#include "reactnet/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace reactnet {

namespace {

uint32_t read_be32(std::istream& in, const char* what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error(std::string("truncated file while reading ") + what);
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) |
           uint32_t(b[3]);
}

}  // namespace

void Dataset::compute_normalization() {
    mean.assign(static_cast<size_t>(channels), 0.0);
    stddev.assign(static_cast<size_t>(channels), 0.0);
    const int64_t plane = height * width;
    const double denom = static_cast<double>(count * plane);
    for (int64_t c = 0; c < channels; ++c) {
        double s = 0.0, s2 = 0.0;
        for (int64_t i = 0; i < count; ++i) {
            const uint8_t* p = pixels.data() + (i * channels + c) * plane;
            for (int64_t q = 0; q < plane; ++q) {
                const double v = p[q] / 255.0;
                s += v;
                s2 += v * v;
            }
        }
        const double mu = s / denom;
        mean[static_cast<size_t>(c)] = mu;
        stddev[static_cast<size_t>(c)] = std::sqrt(std::max(s2 / denom - mu * mu, 1e-12));
    }
}

FloatTensor Dataset::make_batch(const std::vector<int64_t>& indices, int64_t out_h,
                                int64_t out_w, bool augment, std::mt19937_64* rng) const {
    if (out_h < height || out_w < width)
        throw std::invalid_argument("make_batch: output smaller than source image");
    const int64_t n = static_cast<int64_t>(indices.size());
    const int64_t plane = height * width;
    FloatTensor out({n, channels, out_h, out_w});
    const int64_t off_h = (out_h - height) / 2, off_w = (out_w - width) / 2;
    std::uniform_int_distribution<int> shift(-4, 4);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int64_t i = 0; i < n; ++i) {
        const int64_t idx = indices[static_cast<size_t>(i)];
        if (idx < 0 || idx >= count) throw std::out_of_range("make_batch: index out of range");
        int dh = 0, dw = 0;
        bool flip = false;
        if (augment && rng) {
            dh = shift(*rng);
            dw = shift(*rng);
            flip = coin(*rng) != 0;
        }
        for (int64_t c = 0; c < channels; ++c) {
            const uint8_t* src = pixels.data() + (idx * channels + c) * plane;
            const double mu = mean[static_cast<size_t>(c)];
            const double sd = stddev[static_cast<size_t>(c)];
            for (int64_t h = 0; h < height; ++h)
                for (int64_t w = 0; w < width; ++w) {
                    const int64_t sw = flip ? width - 1 - w : w;
                    const int64_t th = off_h + h + dh, tw = off_w + w + dw;
                    if (th < 0 || th >= out_h || tw < 0 || tw >= out_w) continue;
                    out.at(i, c, th, tw) = (src[h * width + sw] / 255.0 - mu) / sd;
                }
            // zero-padded border corresponds to raw pixel value mu, shifted to 0
            if (mu != 0.0) {
                double fill = (0.0 - mu) / sd;
                for (int64_t h = 0; h < out_h; ++h)
                    for (int64_t w = 0; w < out_w; ++w) {
                        const int64_t sh = h - off_h - dh, sw2 = w - off_w - dw;
                        if (sh < 0 || sh >= height || sw2 < 0 || sw2 >= width)
                            out.at(i, c, h, w) = fill;
                    }
            }
        }
    }
    return out;
}

std::vector<int> Dataset::batch_labels(const std::vector<int64_t>& indices) const {
    std::vector<int> out;
    out.reserve(indices.size());
    for (int64_t i : indices) out.push_back(labels[static_cast<size_t>(i)]);
    return out;
}

Dataset load_mnist(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("cannot open " + images_path);
    if (read_be32(img, "image magic") != 0x00000803u)
        throw std::runtime_error(images_path + ": bad IDX image magic (want 0x00000803)");
    Dataset d;
    d.count = read_be32(img, "image count");
    d.height = read_be32(img, "rows");
    d.width = read_be32(img, "cols");
    d.channels = 1;
    d.pixels.resize(static_cast<size_t>(d.count * d.height * d.width));
    if (!img.read(reinterpret_cast<char*>(d.pixels.data()),
                  static_cast<std::streamsize>(d.pixels.size())))
        throw std::runtime_error(images_path + ": truncated image data");

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("cannot open " + labels_path);
    if (read_be32(lab, "label magic") != 0x00000801u)
        throw std::runtime_error(labels_path + ": bad IDX label magic (want 0x00000801)");
    const uint32_t nlab = read_be32(lab, "label count");
    if (nlab != static_cast<uint32_t>(d.count))
        throw std::runtime_error("MNIST image/label count mismatch");
    std::vector<uint8_t> raw(nlab);
    if (!lab.read(reinterpret_cast<char*>(raw.data()), nlab))
        throw std::runtime_error(labels_path + ": truncated label data");
    d.labels.assign(raw.begin(), raw.end());
    d.compute_normalization();
    return d;
}

Dataset load_cifar10(const std::vector<std::string>& batch_paths) {
    constexpr int64_t kRecord = 3073;  // label byte + 3*32*32 pixels
    Dataset d;
    d.channels = 3;
    d.height = d.width = 32;
    for (const std::string& path : batch_paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open " + path);
        in.seekg(0, std::ios::end);
        const int64_t size = in.tellg();
        in.seekg(0);
        if (size == 0 || size % kRecord != 0)
            throw std::runtime_error(path + ": size is not a multiple of 3073 bytes");
        const int64_t n = size / kRecord;
        std::vector<uint8_t> rec(kRecord);
        for (int64_t i = 0; i < n; ++i) {
            if (!in.read(reinterpret_cast<char*>(rec.data()), kRecord))
                throw std::runtime_error(path + ": truncated record");
            d.labels.push_back(rec[0]);
            d.pixels.insert(d.pixels.end(), rec.begin() + 1, rec.end());
        }
        d.count += n;
    }
    d.compute_normalization();
    return d;
}

}  // namespace reactnet
