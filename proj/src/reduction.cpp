#include "panelfair/reduction.hpp"

#include <atomic>
#include <stdexcept>
#include <string>

#include "panelfair/errors.hpp"
#include "panelfair/losses.hpp"

namespace panelfair {

namespace {

std::atomic<std::uint64_t> g_masked_reads{0};

}  // namespace

class SemiBanditObserver {
public:
    static MaskedLosses mask(const ReducedRound& reduced) {
        MaskedLosses out;
        const std::size_t n = reduced.loss_vector.size();
        out.values_.assign(n, 0.0);
        out.observed_.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (reduced.action_vector[i]) {
                out.observed_[i] = 1;
                out.values_[i] = reduced.loss_vector[i];
            }
        }
        return out;
    }
};

double ReducedRound::inner_product() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < loss_vector.size(); ++i) {
        if (action_vector[i]) sum += loss_vector[i];
    }
    return sum;
}

ReducedRound reduce_round(const RoundInstance& instance, const Hypothesis& h, const AuditReport& report,
                          std::size_t C) {
    if (C == 0) throw ConfigError("reduction needs C >= 1");
    ReducedRound out;
    out.k = instance.k();
    out.C = C;
    const std::size_t width = out.width();

    out.augmented_contexts.reserve(width);
    out.augmented_labels.reserve(width);
    out.augmented_contexts.insert(out.augmented_contexts.end(), instance.contexts.begin(), instance.contexts.end());
    out.augmented_labels.insert(out.augmented_labels.end(), instance.labels.begin(), instance.labels.end());
    out.augmented_contexts.insert(out.augmented_contexts.end(), C, report.first);
    out.augmented_labels.insert(out.augmented_labels.end(), C, Bit{0});
    out.augmented_contexts.insert(out.augmented_contexts.end(), C, report.second);
    out.augmented_labels.insert(out.augmented_labels.end(), C, Bit{1});

    out.loss_vector.resize(2 * width);
    out.action_vector.resize(2 * width);
    for (std::size_t i = 0; i < width; ++i) {
        const ContextId x = out.augmented_contexts[i];
        if (x < 0 || static_cast<std::size_t>(x) >= h.size()) {
            throw InputError("reduction references unknown context " + std::to_string(x));
        }
        out.loss_vector[i] = 1.0 - static_cast<double>(out.augmented_labels[i]);
        out.loss_vector[width + i] = 0.5;
        out.action_vector[i] = h(x);
        out.action_vector[width + i] = static_cast<Bit>(1 - h(x));
    }
    return out;
}

double action_loss(const ReducedRound& reduced, const Hypothesis& h) {
    const std::size_t width = reduced.width();
    double sum = 0.0;
    for (std::size_t i = 0; i < width; ++i) {
        sum += h(reduced.augmented_contexts[i]) ? reduced.loss_vector[i] : reduced.loss_vector[width + i];
    }
    return sum;
}

double MaskedLosses::at(std::size_t i) const {
    if (!observed_.at(i)) {
        g_masked_reads.fetch_add(1, std::memory_order_relaxed);
        throw std::logic_error("read of masked loss coordinate " + std::to_string(i));
    }
    return values_[i];
}

std::uint64_t MaskedLosses::masked_read_attempts() noexcept { return g_masked_reads.load(); }

void MaskedLosses::reset_masked_read_attempts() noexcept { g_masked_reads.store(0); }

SemiBanditFeedback semi_bandit_observe(const ReducedRound& reduced) {
    SemiBanditFeedback fb;
    fb.k = reduced.k;
    fb.C = reduced.C;
    fb.augmented_contexts = reduced.augmented_contexts;
    fb.action = reduced.action_vector;
    fb.losses = SemiBanditObserver::mask(reduced);
    return fb;
}

IdentitySides lagrangian_identity_check(const Policy& pi, const Policy& pi2, const HypothesisClass& cls,
                                        const RoundInstance& instance, const AuditReport& report, std::size_t C) {
    if (pi.size() != cls.size() || pi2.size() != cls.size()) {
        throw ConfigError("policy dimension does not match the class");
    }
    const LagrangianParams params(static_cast<double>(C), report.first, report.second);
    const double lhs = lagrangian_loss(pi, cls, instance, params) - lagrangian_loss(pi2, cls, instance, params);

    // The loss vector does not depend on the hypothesis, so one reduction serves all of them.
    const ReducedRound reduced = reduce_round(instance, cls[0], report, C);
    double expected_pi = 0.0;
    double expected_pi2 = 0.0;
    for (std::size_t h = 0; h < cls.size(); ++h) {
        const double inner = action_loss(reduced, cls[h]);
        expected_pi += pi[h] * inner;
        expected_pi2 += pi2[h] * inner;
    }
    return {lhs, 2.0 * (expected_pi - expected_pi2)};
}

}  // namespace panelfair
