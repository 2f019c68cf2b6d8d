#pragma once

#include <string>

#include "brar/common.hpp"
#include "brar/posterior.hpp"

namespace brar {

// A fixed-horizon response-adaptive design: burn-in of `burn_in` per arm
// (strict alternation), then posterior-probability allocation, optionally
// clipped, until `horizon` participants are allocated.
struct design_spec {
    int horizon = 60;
    int burn_in = 0;
    beta_prior prior{};
    double clip_lo = 0.0;
    double clip_hi = 1.0;
    double policy_tol = 1e-3;  // quadrature tolerance for allocation probabilities
    double stat_tol = 1e-6;    // quadrature tolerance for final-state statistics

    void validate() const {
        if (horizon < 1 || horizon > 254) throw config_error("design_spec: horizon must be in [1, 254]");
        if (burn_in < 0 || 2 * burn_in > horizon)
            throw config_error("design_spec: burn-in must satisfy 0 <= 2b <= horizon");
        prior.validate();
        if (!(clip_lo >= 0.0 && clip_lo <= clip_hi && clip_hi <= 1.0))
            throw config_error("design_spec: clipping bounds must satisfy 0 <= lo <= hi <= 1");
        if (!(policy_tol > 0.0) || !(stat_tol > 0.0))
            throw config_error("design_spec: quadrature tolerances must be positive");
    }

    int adaptive_start() const { return 2 * burn_in; }
    double burn_in_proportion() const { return 2.0 * burn_in / horizon; }

    std::string canonical_string() const {
        return "n=" + std::to_string(horizon) + ";b=" + std::to_string(burn_in) +
               ";prior=" + format_double(prior.alpha) + "," + format_double(prior.beta) +
               ";clip=" + format_double(clip_lo) + "," + format_double(clip_hi) +
               ";ptol=" + format_double(policy_tol) + ";stol=" + format_double(stat_tol);
    }
    std::uint64_t hash() const { return fnv1a64(canonical_string()); }
};

}  // namespace brar
