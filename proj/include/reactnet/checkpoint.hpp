#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace reactnet {

// Versioned tensor-archive file:
//   magic "RAKT", u32 version, u32 tensor count, then per tensor:
//   u32 name length + name bytes, u32 rank, dims as u64 little-endian,
//   u8 dtype tag (0 = f64, 1 = raw bytes), payload; trailing CRC32 of
//   everything before it.
struct Checkpoint {
    static constexpr uint32_t kVersion = 1;

    struct Entry {
        std::vector<int64_t> dims;
        std::vector<double> f64;    // dtype 0
        std::vector<uint8_t> bytes; // dtype 1
        bool is_bytes = false;
    };
    std::map<std::string, Entry> tensors;

    void put(const std::string& name, const std::vector<int64_t>& dims,
             const std::vector<double>& values);
    void put_bytes(const std::string& name, const std::vector<uint8_t>& raw);
    void put_scalar(const std::string& name, double v) { put(name, {1}, {v}); }

    const Entry& get(const std::string& name) const;
    bool has(const std::string& name) const { return tensors.count(name) != 0; }
    double scalar(const std::string& name) const { return get(name).f64.at(0); }
};

uint32_t crc32(const uint8_t* data, size_t len);

void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace reactnet
