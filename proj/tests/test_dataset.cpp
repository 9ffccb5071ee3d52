#include <doctest.h>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "reactnet/dataset.hpp"

using namespace reactnet;

namespace {

void write_be32(std::ofstream& out, uint32_t v) {
    const uint8_t b[4] = {static_cast<uint8_t>(v >> 24), static_cast<uint8_t>(v >> 16),
                          static_cast<uint8_t>(v >> 8), static_cast<uint8_t>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/reactnet_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

void write_idx_pair(const std::string& img_path, const std::string& lab_path, int n,
                    uint32_t img_magic = 0x803, uint32_t lab_magic = 0x801,
                    bool truncate_images = false) {
    std::ofstream img(img_path, std::ios::binary);
    write_be32(img, img_magic);
    write_be32(img, static_cast<uint32_t>(n));
    write_be32(img, 4);
    write_be32(img, 4);
    std::vector<char> px(static_cast<size_t>(n) * 16, 7);
    img.write(px.data(), truncate_images ? 5 : static_cast<std::streamsize>(px.size()));
    img.close();
    std::ofstream lab(lab_path, std::ios::binary);
    write_be32(lab, lab_magic);
    write_be32(lab, static_cast<uint32_t>(n));
    for (int i = 0; i < n; ++i) {
        const char y = static_cast<char>(i % 10);
        lab.write(&y, 1);
    }
}

}  // namespace

TEST_CASE("mnist loader reads a synthetic IDX pair") {
    TempFile img("img"), lab("lab");
    write_idx_pair(img.path, lab.path, 6);
    Dataset d = load_mnist(img.path, lab.path);
    CHECK(d.count == 6);
    CHECK(d.channels == 1);
    CHECK(d.height == 4);
    CHECK(d.width == 4);
    CHECK(d.labels[5] == 5);
    CHECK(d.pixels.size() == 6u * 16u);
}

TEST_CASE("mnist loader rejects bad magic, truncation and count mismatch") {
    TempFile img("img2"), lab("lab2");
    write_idx_pair(img.path, lab.path, 3, 0x123);
    CHECK_THROWS(load_mnist(img.path, lab.path));
    write_idx_pair(img.path, lab.path, 3, 0x803, 0x777);
    CHECK_THROWS(load_mnist(img.path, lab.path));
    write_idx_pair(img.path, lab.path, 3, 0x803, 0x801, true);
    CHECK_THROWS(load_mnist(img.path, lab.path));
    CHECK_THROWS(load_mnist("/nonexistent/file", lab.path));
}

TEST_CASE("cifar10 loader reads 3073-byte records") {
    TempFile f("cifar");
    std::ofstream out(f.path, std::ios::binary);
    for (int rec = 0; rec < 2; ++rec) {
        const char y = static_cast<char>(rec + 1);
        out.write(&y, 1);
        std::vector<char> px(3072, static_cast<char>(rec * 10));
        out.write(px.data(), static_cast<std::streamsize>(px.size()));
    }
    out.close();
    Dataset d = load_cifar10({f.path});
    CHECK(d.count == 2);
    CHECK(d.channels == 3);
    CHECK(d.height == 32);
    CHECK(d.labels == std::vector<int>{1, 2});
}

TEST_CASE("cifar10 loader rejects odd-sized files") {
    TempFile f("cifar_bad");
    std::ofstream out(f.path, std::ios::binary);
    out.write("xyz", 3);
    out.close();
    CHECK_THROWS(load_cifar10({f.path}));
}

TEST_CASE("make_batch normalizes and pads the border with normalized black") {
    TempFile img("img3"), lab("lab3");
    write_idx_pair(img.path, lab.path, 4);
    Dataset d = load_mnist(img.path, lab.path);
    d.compute_normalization();
    FloatTensor b = d.make_batch({0, 2}, 6, 6);
    CHECK(b.shape == std::vector<int64_t>{2, 1, 6, 6});
    CHECK(b.at(0, 0, 0, 0) == doctest::Approx((0.0 - d.mean[0]) / d.stddev[0]));
    // every source pixel is 7, so normalized interior values are all equal
    CHECK(b.at(0, 0, 1, 1) == b.at(1, 0, 2, 2));
    CHECK(d.batch_labels({0, 2}) == std::vector<int>{0, 2});
}

TEST_CASE("make_batch validates indices") {
    TempFile img("img4"), lab("lab4");
    write_idx_pair(img.path, lab.path, 2);
    Dataset d = load_mnist(img.path, lab.path);
    d.compute_normalization();
    CHECK_THROWS(d.make_batch({5}, 6, 6));
    CHECK_THROWS(d.make_batch({0}, 2, 2));  // smaller than the source image
}
