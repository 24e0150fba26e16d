#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "panelfair/core.hpp"
#include "panelfair/rng.hpp"

namespace testing {

using namespace panelfair;

inline Hypothesis table(std::vector<Bit> bits) { return Hypothesis(std::move(bits)); }

inline HypothesisClass make_class(std::vector<std::vector<Bit>> tables,
                                  HypothesisClass::ConstantMember constant = HypothesisClass::ConstantMember::Required) {
    std::vector<Hypothesis> hs;
    for (auto& t : tables) hs.emplace_back(std::move(t));
    return HypothesisClass("test", std::move(hs), constant);
}

// Dirichlet(1, ..., 1) via normalized exponentials.
inline Policy random_policy(std::size_t n, Rng& rng) {
    std::vector<double> w(n);
    for (double& x : w) x = -std::log(1.0 - uniform01(rng));
    return Policy::normalized(std::move(w));
}

// Marginal recomputed by hand, independent of policy_marginal.
inline double marginal_by_hand(const Policy& p, const HypothesisClass& cls, ContextId x) {
    double s = 0.0;
    for (std::size_t h = 0; h < cls.size(); ++h) {
        if (cls[h](x) == 1) s += p[h];
    }
    return s;
}

}  // namespace testing
