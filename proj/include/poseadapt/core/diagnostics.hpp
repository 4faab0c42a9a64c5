#pragma once

#include <atomic>
#include <cstdint>

namespace poseadapt {

/// Process-wide counters for defined-but-unusual situations that are not
/// errors (all-masked losses, empty style pools, ...).
struct Diagnostics {
    std::atomic<uint64_t> all_channels_masked{0};
    std::atomic<uint64_t> empty_style_pool{0};
    std::atomic<uint64_t> keypoint_out_of_bounds{0};

    void reset() {
        all_channels_masked = 0;
        empty_style_pool = 0;
        keypoint_out_of_bounds = 0;
    }
};

inline Diagnostics& diagnostics() {
    static Diagnostics d;
    return d;
}

}  // namespace poseadapt
