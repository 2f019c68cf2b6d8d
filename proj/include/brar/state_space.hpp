#pragma once

#include <cstdint>
#include <vector>

#include "brar/common.hpp"

namespace brar {

// Sufficient statistic of a two-arm binary trial after i = n_c + n_d
// allocations: per-arm sample sizes and success counts.
struct trial_state {
    int n_c = 0;
    int s_c = 0;
    int n_d = 0;
    int s_d = 0;

    int stage() const { return n_c + n_d; }
    int successes() const { return s_c + s_d; }
    bool valid() const { return n_c >= 0 && n_d >= 0 && s_c >= 0 && s_d >= 0 && s_c <= n_c && s_d <= n_d; }
    bool operator==(const trial_state&) const = default;

    // Dense 32-bit key; components must fit in a byte (stages up to 255).
    std::uint32_t pack() const {
        return (static_cast<std::uint32_t>(n_c) << 24) | (static_cast<std::uint32_t>(s_c) << 16) |
               (static_cast<std::uint32_t>(n_d) << 8) | static_cast<std::uint32_t>(s_d);
    }
};

inline std::int64_t stage_state_count(int stage) {
    const std::int64_t i = stage;
    return (i + 1) * (i + 2) * (i + 3) / 6;
}

// Indexes the states of one stage in ascending (n_c, s_c, s_d) order:
// block n_c holds (n_c+1)*(n_d+1) states, n_d = stage - n_c.
class stage_layout {
public:
    explicit stage_layout(int stage) : stage_(stage) {
        BRAR_REQUIRE_ARG(stage >= 0, "stage_layout: stage must be nonnegative");
        offsets_.resize(stage + 2);
        std::int64_t acc = 0;
        for (int n_c = 0; n_c <= stage; ++n_c) {
            offsets_[n_c] = acc;
            acc += static_cast<std::int64_t>(n_c + 1) * (stage - n_c + 1);
        }
        offsets_[stage + 1] = acc;
    }

    int stage() const { return stage_; }
    std::int64_t size() const { return offsets_.back(); }

    std::int64_t index_of(const trial_state& x) const {
        BRAR_REQUIRE_ARG(x.valid() && x.stage() == stage_, "stage_layout: state not in this stage");
        return offsets_[x.n_c] + static_cast<std::int64_t>(x.s_c) * (x.n_d + 1) + x.s_d;
    }

    trial_state state_at(std::int64_t idx) const {
        BRAR_REQUIRE_ARG(idx >= 0 && idx < size(), "stage_layout: index out of range");
        // Blocks are small (<= stage+1 of them); locate by linear/binary mix.
        int lo = 0, hi = stage_;
        while (lo < hi) {
            const int mid = (lo + hi + 1) / 2;
            if (offsets_[mid] <= idx) lo = mid;
            else hi = mid - 1;
        }
        const int n_c = lo;
        const int n_d = stage_ - n_c;
        const std::int64_t rem = idx - offsets_[n_c];
        trial_state x;
        x.n_c = n_c;
        x.n_d = n_d;
        x.s_c = static_cast<int>(rem / (n_d + 1));
        x.s_d = static_cast<int>(rem % (n_d + 1));
        return x;
    }

    const std::vector<std::int64_t>& offsets() const { return offsets_; }

private:
    int stage_;
    std::vector<std::int64_t> offsets_;
};

inline std::vector<trial_state> enumerate_states(int stage) {
    const stage_layout layout(stage);
    std::vector<trial_state> out;
    out.reserve(layout.size());
    for (int n_c = 0; n_c <= stage; ++n_c) {
        const int n_d = stage - n_c;
        for (int s_c = 0; s_c <= n_c; ++s_c)
            for (int s_d = 0; s_d <= n_d; ++s_d) out.push_back({n_c, s_c, n_d, s_d});
    }
    return out;
}

}  // namespace brar
