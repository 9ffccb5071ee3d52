#include "reactnet/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace reactnet {

FloatTensor::FloatTensor(std::vector<int64_t> s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<int64_t>(data.size()) != numel_of(shape))
        throw std::invalid_argument("FloatTensor: data length " + std::to_string(data.size()) +
                                    " does not match shape " + shape_str(shape));
}

void FloatTensor::check_finite(const char* what) const {
    for (double v : data)
        if (!std::isfinite(v))
            throw std::runtime_error(std::string("non-finite value in ") + what);
}

BitTensor pack(const FloatTensor& t) {
    BitTensor b(t.shape);
    const int64_t n = t.numel();
    for (int64_t i = 0; i < n; ++i) {
        double v = t.data[static_cast<size_t>(i)];
        if (v == 1.0) {
            b.words[static_cast<size_t>(i >> 6)] |= uint64_t{1} << (i & 63);
        } else if (v != -1.0) {
            throw std::invalid_argument("pack: element " + std::to_string(i) + " = " +
                                        std::to_string(v) + " is not in {-1,+1}");
        }
    }
    return b;
}

FloatTensor unpack(const BitTensor& b) {
    FloatTensor t(b.shape);
    const int64_t n = t.numel();
    for (int64_t i = 0; i < n; ++i)
        t.data[static_cast<size_t>(i)] = b.get(i) ? 1.0 : -1.0;
    return t;
}

std::string shape_str(const std::vector<int64_t>& s) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ")";
    return os.str();
}

}  // namespace reactnet
