#pragma once

#include <atomic>
#include <cstdint>

namespace reactnet::instrument {

// MAC counters for cross-checking the static OPs report against what the
// kernels actually execute. Disabled by default; enable around a forward pass.
inline std::atomic<bool> enabled{false};
inline std::atomic<int64_t> bops{0};
inline std::atomic<int64_t> flops{0};

inline void reset() {
    bops = 0;
    flops = 0;
}

inline void add_bops(int64_t n) {
    if (enabled.load(std::memory_order_relaxed)) bops.fetch_add(n, std::memory_order_relaxed);
}
inline void add_flops(int64_t n) {
    if (enabled.load(std::memory_order_relaxed)) flops.fetch_add(n, std::memory_order_relaxed);
}

}  // namespace reactnet::instrument
