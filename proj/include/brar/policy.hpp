#pragma once

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "brar/common.hpp"
#include "brar/design.hpp"
#include "brar/posterior.hpp"
#include "brar/state_space.hpp"

namespace brar {

// One-shot allocation probability: clipped PPCS of the current state.
// Burn-in allocations are deterministic and must never come through here;
// design-aware callers use allocation_prob below, which enforces that.
inline double allocation_prob_free(const trial_state& x, const beta_prior& prior, double clip_lo,
                                   double clip_hi, double tol) {
    quad_options opt;
    opt.abs_tol = tol;
    return std::clamp(ppcs(x, prior, opt), clip_lo, clip_hi);
}

// Allocation probabilities for every state of a contiguous stage range,
// evaluated once and reused across burn-in settings: the probability depends
// only on the state, never on the design's burn-in.
class policy_table {
public:
    policy_table(int first_stage, int last_stage, beta_prior prior, double clip_lo, double clip_hi,
                 double tol)
        : first_stage_(first_stage), last_stage_(last_stage), prior_(prior), clip_lo_(clip_lo),
          clip_hi_(clip_hi), tol_(tol), pi_(last_stage + 1) {
        BRAR_REQUIRE_ARG(0 <= first_stage && first_stage <= last_stage,
                         "policy_table: bad stage range");
    }

    int first_stage() const { return first_stage_; }
    int last_stage() const { return last_stage_; }
    const beta_prior& prior() const { return prior_; }
    double clip_lo() const { return clip_lo_; }
    double clip_hi() const { return clip_hi_; }
    double tol() const { return tol_; }

    bool covers(int stage) const { return first_stage_ <= stage && stage <= last_stage_; }

    const std::vector<double>& stage_values(int stage) const {
        BRAR_REQUIRE_ARG(covers(stage), "policy_table: stage outside the built range");
        return pi_[stage];
    }

    double at(int stage, std::int64_t idx) const { return stage_values(stage)[idx]; }

    std::vector<double>& mutable_stage(int stage) {
        BRAR_REQUIRE_ARG(covers(stage), "policy_table: stage outside the built range");
        return pi_[stage];
    }

private:
    int first_stage_, last_stage_;
    beta_prior prior_;
    double clip_lo_, clip_hi_, tol_;
    std::vector<std::vector<double>> pi_;
};

inline policy_table build_policy_table(int first_stage, int last_stage, const beta_prior& prior,
                                       double clip_lo = 0.0, double clip_hi = 1.0, double tol = 1e-3) {
    prior.validate();
    policy_table table(first_stage, last_stage, prior, clip_lo, clip_hi, tol);
    quad_options opt;
    opt.abs_tol = tol;
    for (int stage = first_stage; stage <= last_stage; ++stage) {
        const stage_layout layout(stage);
        auto& values = table.mutable_stage(stage);
        values.resize(layout.size());
        for (std::int64_t idx = 0; idx < layout.size(); ++idx) {
            values[idx] = std::clamp(ppcs_from_posterior(posterior_of(layout.state_at(idx), prior), opt),
                                     clip_lo, clip_hi);
        }
    }
    return table;
}

inline policy_table build_policy_table(const design_spec& design, int first_stage = -1) {
    design.validate();
    if (first_stage < 0) first_stage = design.adaptive_start();
    const int last = std::max(design.horizon - 1, first_stage);
    return build_policy_table(first_stage, last, design.prior, design.clip_lo, design.clip_hi,
                              design.policy_tol);
}

// Design-aware lookup; querying a burn-in stage is a caller bug.
inline double allocation_prob(const design_spec& design, const policy_table& table,
                              const trial_state& x) {
    if (x.stage() < design.adaptive_start())
        throw contract_error("allocation_prob: state is inside the burn-in phase");
    if (x.stage() >= design.horizon)
        throw contract_error("allocation_prob: state is at or past the horizon");
    const stage_layout layout(x.stage());
    return table.at(x.stage(), layout.index_of(x));
}

// --- binary cache ------------------------------------------------------
//
// Layout: magic, format version, key fields, per-stage arrays, FNV-1a
// checksum over everything after the magic. Any mismatch (key, size,
// checksum) is treated as a miss so corruption triggers recomputation.

namespace detail {
inline constexpr char policy_cache_magic[8] = {'B', 'R', 'A', 'R', 'P', 'O', 'L', '1'};

inline void append_bytes(std::string& buf, const void* p, std::size_t n) {
    buf.append(static_cast<const char*>(p), n);
}
template <class T>
inline void append_pod(std::string& buf, const T& v) {
    append_bytes(buf, &v, sizeof(T));
}
template <class T>
inline bool read_pod(const std::string& buf, std::size_t& off, T& v) {
    if (off + sizeof(T) > buf.size()) return false;
    std::memcpy(&v, buf.data() + off, sizeof(T));
    off += sizeof(T);
    return true;
}
}  // namespace detail

inline std::string policy_cache_payload(const policy_table& t) {
    std::string buf;
    detail::append_pod(buf, std::uint32_t{1});
    detail::append_pod(buf, t.prior().alpha);
    detail::append_pod(buf, t.prior().beta);
    detail::append_pod(buf, t.clip_lo());
    detail::append_pod(buf, t.clip_hi());
    detail::append_pod(buf, t.tol());
    detail::append_pod(buf, std::int32_t{t.first_stage()});
    detail::append_pod(buf, std::int32_t{t.last_stage()});
    for (int stage = t.first_stage(); stage <= t.last_stage(); ++stage) {
        const auto& v = t.stage_values(stage);
        detail::append_pod(buf, std::int64_t(v.size()));
        detail::append_bytes(buf, v.data(), v.size() * sizeof(double));
    }
    return buf;
}

inline void save_policy_cache(const policy_table& t, const std::string& path) {
    const std::string payload = policy_cache_payload(t);
    const std::uint64_t checksum = fnv1a64(payload.data(), payload.size());
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw io_error("cannot open policy cache for writing: " + path);
    bool ok = std::fwrite(detail::policy_cache_magic, 1, 8, f) == 8;
    ok = ok && std::fwrite(payload.data(), 1, payload.size(), f) == payload.size();
    ok = ok && std::fwrite(&checksum, 1, sizeof(checksum), f) == sizeof(checksum);
    ok = (std::fclose(f) == 0) && ok;
    if (!ok) throw io_error("failed writing policy cache: " + path);
}

// Returns the cached table when the file exists, is intact (checksum), and
// matches the request exactly; anything else is a miss, never an error.
inline std::optional<policy_table> load_policy_cache(const std::string& path, int first_stage,
                                                     int last_stage, const beta_prior& prior,
                                                     double clip_lo, double clip_hi, double tol) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) return std::nullopt;
    std::string raw;
    char chunk[65536];
    std::size_t got;
    while ((got = std::fread(chunk, 1, sizeof(chunk), f)) > 0) raw.append(chunk, got);
    std::fclose(f);
    if (raw.size() < 8 + sizeof(std::uint64_t)) return std::nullopt;
    if (std::memcmp(raw.data(), detail::policy_cache_magic, 8) != 0) return std::nullopt;
    const std::string payload = raw.substr(8, raw.size() - 8 - sizeof(std::uint64_t));
    std::uint64_t stored = 0;
    std::memcpy(&stored, raw.data() + raw.size() - sizeof(std::uint64_t), sizeof(std::uint64_t));
    if (fnv1a64(payload.data(), payload.size()) != stored) return std::nullopt;
    std::size_t off = 0;
    std::uint32_t version = 0;
    double alpha, beta, lo, hi, t;
    std::int32_t first, last;
    if (!detail::read_pod(payload, off, version) || version != 1) return std::nullopt;
    if (!detail::read_pod(payload, off, alpha) || !detail::read_pod(payload, off, beta) ||
        !detail::read_pod(payload, off, lo) || !detail::read_pod(payload, off, hi) ||
        !detail::read_pod(payload, off, t) || !detail::read_pod(payload, off, first) ||
        !detail::read_pod(payload, off, last))
        return std::nullopt;
    if (alpha != prior.alpha || beta != prior.beta || lo != clip_lo || hi != clip_hi || t != tol ||
        first != first_stage || last != last_stage)
        return std::nullopt;
    policy_table table(first, last, {alpha, beta}, lo, hi, t);
    for (int stage = first; stage <= last; ++stage) {
        std::int64_t count = 0;
        if (!detail::read_pod(payload, off, count)) return std::nullopt;
        if (count != stage_state_count(stage)) return std::nullopt;
        auto& v = table.mutable_stage(stage);
        v.resize(count);
        if (off + count * sizeof(double) > payload.size()) return std::nullopt;
        std::memcpy(v.data(), payload.data() + off, count * sizeof(double));
        off += count * sizeof(double);
    }
    return table;
}

inline std::string policy_cache_name(int first_stage, int last_stage, const beta_prior& prior,
                                     double clip_lo, double clip_hi, double tol) {
    const std::string key = std::to_string(first_stage) + ":" + std::to_string(last_stage) + ":" +
                            format_double(prior.alpha) + ":" + format_double(prior.beta) + ":" +
                            format_double(clip_lo) + ":" + format_double(clip_hi) + ":" +
                            format_double(tol);
    return "policy_" + hex64(fnv1a64(key)) + ".bin";
}

}  // namespace brar
