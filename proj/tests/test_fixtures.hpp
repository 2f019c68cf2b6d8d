#pragma once

#include <map>
#include <utility>
#include <vector>

#include "brar/coefficients.hpp"
#include "brar/policy.hpp"
#include "brar/posterior.hpp"

namespace fixtures {

// One shared allocation table: the columns are horizon-independent, so a
// table over stages 0..59 serves every fixed design with horizon <= 60.
inline const brar::policy_table& shared_policy() {
    static const brar::policy_table table =
        brar::build_policy_table(0, 59, brar::beta_prior{}, 0.0, 1.0, 1e-3);
    return table;
}

inline const std::vector<double>& statistic_image_of(int stage, brar::statistic_kind kind) {
    static std::map<std::pair<int, brar::statistic_kind>, std::vector<double>> cache;
    auto it = cache.find({stage, kind});
    if (it == cache.end()) {
        it = cache.emplace(std::make_pair(stage, kind),
                           brar::statistic_image(stage, kind, brar::beta_prior{}))
                 .first;
    }
    return it->second;
}

inline brar::coefficient_frontier frontier_for(int horizon, int burn_in) {
    brar::design_spec d;
    d.horizon = horizon;
    d.burn_in = burn_in;
    brar::coefficient_frontier f = brar::burn_in_frontier(d);
    while (f.stage < horizon) f = brar::propagate(f, shared_policy());
    return f;
}

}  // namespace fixtures
