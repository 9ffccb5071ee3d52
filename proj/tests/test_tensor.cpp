#include <doctest.h>

#include <random>

#include "reactnet/tensor.hpp"

using namespace reactnet;

TEST_CASE("pack/unpack round-trips random +-1 tensors") {
    std::mt19937_64 rng(11);
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int64_t> dim(1, 9);
    for (int iter = 0; iter < 1000; ++iter) {
        FloatTensor t({dim(rng), dim(rng), dim(rng), dim(rng)});
        for (double& v : t.data) v = coin(rng) ? 1.0 : -1.0;
        BitTensor b = pack(t);
        FloatTensor back = unpack(b);
        REQUIRE(back.shape == t.shape);
        REQUIRE(back.data == t.data);
    }
}

TEST_CASE("pack rejects values other than +-1") {
    FloatTensor t({2, 2});
    t.data = {1.0, -1.0, 0.5, 1.0};
    CHECK_THROWS(pack(t));
    t.data = {1.0, -1.0, 0.0, 1.0};
    CHECK_THROWS(pack(t));
}

TEST_CASE("packing convention: bit 1 is +1, padding bits stay 0") {
    FloatTensor t({65});
    for (double& v : t.data) v = -1.0;
    t.data[3] = 1.0;
    t.data[64] = 1.0;
    BitTensor b = pack(t);
    CHECK(b.words.size() == 2);
    CHECK(b.words[0] == (uint64_t{1} << 3));
    CHECK(b.words[1] == 1);  // only the single live bit; the 63 pad bits are 0
}

TEST_CASE("BitMatrix rows are word aligned") {
    BitMatrix m(3, 70);
    CHECK(m.words_per_row == 2);
    m.set(2, 69, true);
    CHECK(m.get(2, 69));
    CHECK_FALSE(m.get(1, 69));
    CHECK(m.row(2)[1] == (uint64_t{1} << 5));
}

TEST_CASE("check_finite flags NaN and inf") {
    FloatTensor t({2});
    t.data = {1.0, std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS(t.check_finite("t"));
    t.data = {1.0, std::numeric_limits<double>::infinity()};
    CHECK_THROWS(t.check_finite("t"));
    t.data = {1.0, 2.0};
    CHECK_NOTHROW(t.check_finite("t"));
}
