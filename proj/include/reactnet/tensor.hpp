#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace reactnet {

// Dense real-valued tensor, row-major. Feature maps are NCHW, conv weights OIHW.
struct FloatTensor {
    std::vector<int64_t> shape;
    std::vector<double> data;

    FloatTensor() = default;
    explicit FloatTensor(std::vector<int64_t> s)
        : shape(std::move(s)), data(static_cast<size_t>(numel_of(shape)), 0.0) {}
    FloatTensor(std::vector<int64_t> s, std::vector<double> d);

    static int64_t numel_of(const std::vector<int64_t>& s) {
        int64_t n = 1;
        for (int64_t d : s) n *= d;
        return n;
    }
    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int64_t dim(size_t i) const { return shape[i]; }

    // NCHW accessors (rank 4 only).
    double& at(int64_t n, int64_t c, int64_t h, int64_t w) {
        return data[static_cast<size_t>(((n * shape[1] + c) * shape[2] + h) * shape[3] + w)];
    }
    double at(int64_t n, int64_t c, int64_t h, int64_t w) const {
        return data[static_cast<size_t>(((n * shape[1] + c) * shape[2] + h) * shape[3] + w)];
    }

    bool same_shape(const FloatTensor& o) const { return shape == o.shape; }
    void check_finite(const char* what) const;
};

// Bit-packed {-1,+1} tensor: bit 1 encodes +1, bit 0 encodes -1.
// Contiguous packing in logical element order; padding bits of the last word are 0.
struct BitTensor {
    std::vector<int64_t> shape;
    std::vector<uint64_t> words;

    BitTensor() = default;
    explicit BitTensor(std::vector<int64_t> s)
        : shape(std::move(s)),
          words(static_cast<size_t>((FloatTensor::numel_of(shape) + 63) / 64), 0) {}

    int64_t numel() const { return FloatTensor::numel_of(shape); }

    bool get(int64_t i) const {
        return (words[static_cast<size_t>(i >> 6)] >> (i & 63)) & 1u;
    }
    void set(int64_t i, bool v) {
        uint64_t mask = uint64_t{1} << (i & 63);
        if (v)
            words[static_cast<size_t>(i >> 6)] |= mask;
        else
            words[static_cast<size_t>(i >> 6)] &= ~mask;
    }
};

// Bit matrix with word-aligned rows so kernels can take whole-word dot products
// per row. Row padding bits are kept 0.
struct BitMatrix {
    int64_t rows = 0;
    int64_t cols = 0;
    int64_t words_per_row = 0;
    std::vector<uint64_t> words;

    BitMatrix() = default;
    BitMatrix(int64_t r, int64_t c)
        : rows(r), cols(c), words_per_row((c + 63) / 64),
          words(static_cast<size_t>(r * words_per_row), 0) {}

    std::span<const uint64_t> row(int64_t r) const {
        return {words.data() + r * words_per_row, static_cast<size_t>(words_per_row)};
    }
    std::span<uint64_t> row(int64_t r) {
        return {words.data() + r * words_per_row, static_cast<size_t>(words_per_row)};
    }
    bool get(int64_t r, int64_t c) const {
        return (words[static_cast<size_t>(r * words_per_row + (c >> 6))] >> (c & 63)) & 1u;
    }
    void set(int64_t r, int64_t c, bool v) {
        uint64_t& w = words[static_cast<size_t>(r * words_per_row + (c >> 6))];
        uint64_t mask = uint64_t{1} << (c & 63);
        if (v)
            w |= mask;
        else
            w &= ~mask;
    }
};

// pack rejects any element not exactly +-1; unpack(pack(t)) == t.
BitTensor pack(const FloatTensor& t);
FloatTensor unpack(const BitTensor& b);

std::string shape_str(const std::vector<int64_t>& s);

}  // namespace reactnet
