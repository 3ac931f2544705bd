#pragma once

#include <cstdint>

#include "hardyw/errors.hpp"

namespace hardyw {

struct LhvReport {
    int n = 0;
    std::uint64_t strategies_total = 0;
    std::uint64_t strategies_satisfying_constraints = 0;
    double max_target_probability = 0.0;
    bool paradox_confirmed = false;
};

// Exhaustive check of the classical side of the paradox. A deterministic
// local strategy assigns each qubit a sign for U_i and a sign for D_i
// (4^n strategies). Mixtures add nothing: a zero-probability constraint
// forces every strategy in the mixture's support to avoid the forbidden
// event, so the constrained maximum is attained at a deterministic point.
//
// A strategy satisfies the constraints when none of the n+1 forbidden
// events occurs: (D_i=+, all other U=+) for each i, and (all D=-).
// With drop_last_constraint the all-D event is ignored (diagnostic mode;
// the paradox then disappears and the target reaches 1).
inline LhvReport lhv_paradox_check(int n, bool drop_last_constraint = false) {
    if (n < 2 || n > 10)
        throw validation_error("lhv_paradox_check: qubit count out of [2, 10]");
    LhvReport rep;
    rep.n = n;
    rep.strategies_total = std::uint64_t(1) << (2 * n);
    const std::uint32_t all = (1u << n) - 1;
    for (std::uint64_t s = 0; s < rep.strategies_total; ++s) {
        const std::uint32_t u_plus = static_cast<std::uint32_t>(s) & all;
        const std::uint32_t d_plus = static_cast<std::uint32_t>(s >> n) & all;
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            const std::uint32_t bit = 1u << i;
            if ((d_plus & bit) && (u_plus | bit) == all) ok = false;
        }
        if (ok && !drop_last_constraint && d_plus == 0) ok = false;
        if (!ok) continue;
        ++rep.strategies_satisfying_constraints;
        if (u_plus == all) rep.max_target_probability = 1.0;
    }
    rep.paradox_confirmed = rep.max_target_probability == 0.0;
    return rep;
}

} // namespace hardyw
