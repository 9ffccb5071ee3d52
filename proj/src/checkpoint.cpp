#include "reactnet/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace reactnet {

namespace {

constexpr char kMagic[4] = {'R', 'A', 'K', 'T'};

void push_u32(std::vector<uint8_t>& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void push_u64(std::vector<uint8_t>& buf, uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

struct Reader {
    const std::vector<uint8_t>& buf;
    size_t pos = 0;
    void need(size_t n, const char* what) {
        if (pos + n > buf.size())
            throw std::runtime_error(std::string("checkpoint truncated while reading ") + what);
    }
    uint32_t u32(const char* what) {
        need(4, what);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(buf[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64(const char* what) {
        need(8, what);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(buf[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
};

std::array<uint32_t, 256> make_crc_table() {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
        uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        t[i] = c;
    }
    return t;
}

}  // namespace

uint32_t crc32(const uint8_t* data, size_t len) {
    static const std::array<uint32_t, 256> table = make_crc_table();
    uint32_t c = 0xFFFFFFFFu;
    for (size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

void Checkpoint::put(const std::string& name, const std::vector<int64_t>& dims,
                     const std::vector<double>& values) {
    int64_t n = 1;
    for (int64_t d : dims) n *= d;
    if (n != static_cast<int64_t>(values.size()))
        throw std::invalid_argument("checkpoint put: dims do not match value count for " + name);
    Entry e;
    e.dims = dims;
    e.f64 = values;
    tensors[name] = std::move(e);
}

void Checkpoint::put_bytes(const std::string& name, const std::vector<uint8_t>& raw) {
    Entry e;
    e.dims = {static_cast<int64_t>(raw.size())};
    e.bytes = raw;
    e.is_bytes = true;
    tensors[name] = std::move(e);
}

const Checkpoint::Entry& Checkpoint::get(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw std::runtime_error("checkpoint: missing tensor " + name);
    return it->second;
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
    std::vector<uint8_t> buf;
    buf.insert(buf.end(), kMagic, kMagic + 4);
    push_u32(buf, Checkpoint::kVersion);
    push_u32(buf, static_cast<uint32_t>(c.tensors.size()));
    for (const auto& [name, e] : c.tensors) {
        push_u32(buf, static_cast<uint32_t>(name.size()));
        buf.insert(buf.end(), name.begin(), name.end());
        push_u32(buf, static_cast<uint32_t>(e.dims.size()));
        for (int64_t d : e.dims) push_u64(buf, static_cast<uint64_t>(d));
        buf.push_back(e.is_bytes ? 1 : 0);
        if (e.is_bytes) {
            buf.insert(buf.end(), e.bytes.begin(), e.bytes.end());
        } else {
            for (double v : e.f64) {
                uint64_t bits;
                std::memcpy(&bits, &v, 8);
                push_u64(buf, bits);
            }
        }
    }
    push_u32(buf, crc32(buf.data(), buf.size()));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
    if (buf.size() < 12 + 4) throw std::runtime_error(path + ": truncated checkpoint");
    const uint32_t stored_crc = uint32_t(buf[buf.size() - 4]) |
                                uint32_t(buf[buf.size() - 3]) << 8 |
                                uint32_t(buf[buf.size() - 2]) << 16 |
                                uint32_t(buf[buf.size() - 1]) << 24;
    if (crc32(buf.data(), buf.size() - 4) != stored_crc)
        throw std::runtime_error(path + ": checksum failure");
    buf.resize(buf.size() - 4);

    Reader r{buf};
    r.need(4, "magic");
    if (std::memcmp(buf.data(), kMagic, 4) != 0)
        throw std::runtime_error(path + ": bad magic (not a checkpoint)");
    r.pos = 4;
    const uint32_t version = r.u32("version");
    if (version != Checkpoint::kVersion)
        throw std::runtime_error(path + ": unsupported checkpoint version " +
                                 std::to_string(version));
    const uint32_t count = r.u32("tensor count");
    Checkpoint c;
    for (uint32_t t = 0; t < count; ++t) {
        const uint32_t name_len = r.u32("name length");
        r.need(name_len, "name");
        std::string name(reinterpret_cast<const char*>(buf.data() + r.pos), name_len);
        r.pos += name_len;
        const uint32_t rank = r.u32("rank");
        Checkpoint::Entry e;
        int64_t n = 1;
        for (uint32_t i = 0; i < rank; ++i) {
            e.dims.push_back(static_cast<int64_t>(r.u64("dim")));
            n *= e.dims.back();
        }
        r.need(1, "dtype");
        const uint8_t dtype = buf[r.pos++];
        if (dtype == 1) {
            e.is_bytes = true;
            r.need(static_cast<size_t>(n), "byte payload");
            e.bytes.assign(buf.begin() + static_cast<long>(r.pos),
                           buf.begin() + static_cast<long>(r.pos + n));
            r.pos += static_cast<size_t>(n);
        } else if (dtype == 0) {
            e.f64.resize(static_cast<size_t>(n));
            for (int64_t i = 0; i < n; ++i) {
                const uint64_t bits = r.u64("f64 payload");
                double v;
                std::memcpy(&v, &bits, 8);
                e.f64[static_cast<size_t>(i)] = v;
            }
        } else {
            throw std::runtime_error(path + ": unknown dtype tag");
        }
        c.tensors[name] = std::move(e);
    }
    return c;
}

}  // namespace reactnet
