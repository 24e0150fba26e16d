#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "panelfair/builders.hpp"
#include "panelfair/errors.hpp"
#include "panelfair/learners.hpp"
#include "panelfair/reduction.hpp"
#include "support.hpp"

using namespace panelfair;
using testing::make_class;

namespace {

const auto kMirror = make_class({{1, 0}, {0, 1}}, HypothesisClass::ConstantMember::NotRequired);

SemiBanditFeedback feedback_for(const RoundInstance& r, const Hypothesis& h, const AuditReport& rep, std::size_t C) {
    return semi_bandit_observe(reduce_round(r, h, rep, C));
}

RoundInstance random_round(Rng& rng, std::size_t n, std::size_t k) {
    std::vector<ContextId> xs;
    std::vector<Bit> ys;
    for (std::size_t i = 0; i < k; ++i) {
        xs.push_back(static_cast<ContextId>(uniform_index(rng, n)));
        ys.push_back(static_cast<Bit>(uniform_index(rng, 2)));
    }
    return RoundInstance(xs, ys);
}

AuditReport random_report(Rng& rng, std::size_t n) {
    const auto a = static_cast<ContextId>(uniform_index(rng, n));
    const auto b = static_cast<ContextId>(uniform_index(rng, n));
    return {a, b, a != b};
}

// Brute-force objective of the oracle.
double oracle_objective(const std::vector<EstimatedRound>& history, const Hypothesis& h) {
    double s = 0.0;
    for (const auto& r : history) {
        for (std::size_t i = 0; i < r.contexts.size(); ++i) s += h(r.contexts[i]) * (r.losses[i] - 0.5);
    }
    return s;
}

}  // namespace

TEST_CASE("exp2 policy examples") {
    Exp2Learner fresh(4, 0.1, 0.0);
    for (std::size_t h = 0; h < 4; ++h) CHECK(fresh.policy()[h] == doctest::Approx(0.25));

    Exp2Learner suppressed(3, 0.1, 0.0);
    suppressed.set_log_weights({0.0, -1e9, 0.0});
    CHECK(suppressed.policy()[1] < 1e-300);
    CHECK(suppressed.policy()[0] == doctest::Approx(0.5));

    Exp2Learner mixed(2, 0.1, 0.1);
    CHECK(mixed.policy()[0] == doctest::Approx(0.5));

    Exp2Learner floor(2, 0.1, 0.2);
    floor.set_log_weights({0.0, -1e9});
    CHECK(floor.policy()[1] == doctest::Approx(0.1));

    CHECK_THROWS_AS(Exp2Learner(0, 0.1, 0.0), ConfigError);
    CHECK_THROWS_AS(Exp2Learner(2, 0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(Exp2Learner(2, 0.1, 1.0), ConfigError);
    CHECK_THROWS_AS(fresh.set_log_weights({0.0}), ConfigError);
}

TEST_CASE("exp2 importance weights") {
    Exp2Learner learner(2, 0.1, 0.0);
    const auto fb = feedback_for(RoundInstance({0, 1}, {0, 0}), kMirror[0], AuditReport{0, 0, false}, 1);
    const auto est = learner.estimate_losses(fb, kMirror);
    REQUIRE(est.size() == 8);
    CHECK(est[0] == 2.0);  // q = 1/2, l = 1, observed
    CHECK(est[1] == 0.0);  // masked
    CHECK(est[2] == 2.0);  // rho1 copy, label 0
    CHECK(est[3] == 0.0);  // rho2 copy, label 1: l = 0
    for (std::size_t i = 4; i < 8; ++i) CHECK(est[i] == 0.5);
}

TEST_CASE("exp2 estimator is unbiased by enumeration") {
    Rng rng = substream(61, "test");
    const auto cls = random_class(4, 9, rng);
    double worst = 0.0;
    for (int trial = 0; trial < 300; ++trial) {
        Exp2Learner learner(cls.size(), 0.1, 0.3 * uniform01(rng));
        std::vector<double> w(cls.size());
        for (double& v : w) v = -3.0 * uniform01(rng);
        learner.set_log_weights(w);
        const Policy pi = learner.policy();
        const auto round = random_round(rng, 4, 2 + uniform_index(rng, 2));
        const auto rep = random_report(rng, 4);
        const std::size_t C = 1 + uniform_index(rng, 3);
        const auto truth = reduce_round(round, cls[0], rep, C).loss_vector;
        const std::size_t width = truth.size() / 2;
        std::vector<double> mean(width, 0.0);
        for (std::size_t h = 0; h < cls.size(); ++h) {
            const auto est = learner.estimate_losses(feedback_for(round, cls[h], rep, C), cls);
            for (std::size_t i = 0; i < width; ++i) mean[i] += pi[h] * est[i];
        }
        for (std::size_t i = 0; i < width; ++i) {
            const double q = testing::marginal_by_hand(pi, cls, reduce_round(round, cls[0], rep, C).augmented_contexts[i]);
            if (q > 0.0) worst = std::max(worst, std::abs(mean[i] - truth[i]));
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("exp2 refuses vanishing observation probabilities") {
    const auto cls = make_class({{1, 0}, {0, 0}});
    Exp2Learner learner(2, 0.1, 0.0);
    learner.set_log_weights({-1000.0, 0.0});
    const auto fb = feedback_for(RoundInstance({0, 1}, {0, 0}), cls[0], AuditReport{1, 1, false}, 1);
    CHECK_THROWS_AS(learner.estimate_losses(fb, cls), NumericalError);
}

TEST_CASE("exp2 update subtracts eta times the estimated inner product") {
    Rng rng = substream(62, "test");
    const auto cls = all_functions_class(3);
    Exp2Learner learner(cls.size(), 0.05, 0.1);
    for (int t = 0; t < 200; ++t) {
        const Policy pi = learner.policy();
        const std::size_t h_t = sample_hypothesis(pi, rng);
        const auto round = random_round(rng, 3, 2);
        const auto rep = random_report(rng, 3);
        const auto fb = feedback_for(round, cls[h_t], rep, 2);
        const auto est = learner.estimate_losses(fb, cls);
        const std::vector<double> before(learner.log_weights().begin(), learner.log_weights().end());
        learner.update(fb, cls);
        const auto after = learner.log_weights();
        const std::size_t width = fb.width();
        std::vector<double> expected(cls.size());
        for (std::size_t h = 0; h < cls.size(); ++h) {
            double inner = 0.0;
            for (std::size_t i = 0; i < width; ++i) inner += cls[h](fb.augmented_contexts[i]) ? est[i] : est[width + i];
            expected[h] = before[h] - 0.05 * inner;
        }
        const double shift = *std::max_element(expected.begin(), expected.end());
        for (std::size_t h = 0; h < cls.size(); ++h) CHECK(after[h] == doctest::Approx(expected[h] - shift));
        CHECK(*std::max_element(after.begin(), after.end()) == 0.0);
        const Policy next = learner.policy();
        double sum = 0.0;
        for (double p : next.weights()) {
            CHECK(p >= 0.0);
            sum += p;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
    CHECK(learner.round() == 200);
}

TEST_CASE("erm oracle") {
    const auto cls = make_class({{0, 1, 0}, {1, 1, 1}, {0, 0, 0}});
    CHECK(erm_oracle(std::vector<EstimatedRound>{}, cls) == 0);
    const std::vector<EstimatedRound> negative{{{0, 1, 2}, {0.0, 0.1, 0.2}}};
    CHECK(erm_oracle(negative, cls) == 1);
    const std::vector<EstimatedRound> positive{{{0, 1, 2}, {1.0, 0.9, 0.8}}};
    CHECK(erm_oracle(positive, cls) == 2);
    CHECK_THROWS_AS(erm_oracle(std::vector<EstimatedRound>{{{0, 1}, {0.0}}}, cls), ConfigError);

    Rng rng = substream(63, "test");
    const auto big = random_class(5, 20, rng);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<EstimatedRound> history;
        std::vector<double> weights(5, 0.0);
        const std::size_t T = uniform_index(rng, 6);
        for (std::size_t t = 0; t < T; ++t) {
            EstimatedRound r;
            for (int i = 0; i < 4; ++i) {
                r.contexts.push_back(static_cast<ContextId>(uniform_index(rng, 5)));
                r.losses.push_back(uniform_index(rng, 3) * 0.5 * (1.0 + uniform_index(rng, 3)));
                weights[static_cast<std::size_t>(r.contexts.back())] += r.losses.back() - 0.5;
            }
            history.push_back(r);
        }
        const std::size_t chosen = erm_oracle(history, big);
        const double best = oracle_objective(history, big[chosen]);
        for (std::size_t h = 0; h < big.size(); ++h) {
            const double obj = oracle_objective(history, big[h]);
            CHECK(best <= obj + 1e-12);
            if (h < chosen) CHECK(obj > best);  // lowest index among ties
        }
        CHECK(erm_oracle_weighted(weights, big) == chosen);
    }
}

TEST_CASE("separators") {
    const auto all = all_functions_class(4);
    auto s = find_separator(all);
    std::sort(s.begin(), s.end());
    CHECK(s == std::vector<ContextId>{0, 1, 2, 3});

    const auto pair = make_class({{0, 1, 1}, {0, 0, 1}}, HypothesisClass::ConstantMember::NotRequired);
    CHECK(find_separator(pair) == std::vector<ContextId>{1});

    const auto th = threshold_class(8);
    const auto ts = find_separator(th);
    CHECK(ts.size() <= 8);
    CHECK(is_separator(th, ts));
    for (std::size_t a = 0; a < th.size(); ++a) {
        for (std::size_t b = a + 1; b < th.size(); ++b) {
            CHECK(std::any_of(ts.begin(), ts.end(), [&](ContextId x) { return th[a](x) != th[b](x); }));
        }
    }

    CHECK_FALSE(is_separator(all, std::vector<ContextId>{0, 1, 2}));
    CHECK_FALSE(is_separator(all, std::vector<ContextId>{0, 1, 2, 9}));
    CHECK(is_separator(make_class({{0, 0}}), std::vector<ContextId>{}));

    Rng rng = substream(64, "test");
    for (int trial = 0; trial < 50; ++trial) {
        const auto rc = random_class(6, 2 + uniform_index(rng, 30), rng);
        CHECK(is_separator(rc, find_separator(rc)));
    }
}

TEST_CASE("estimator mode names") {
    CHECK(estimator_mode_from_string("geometric") == EstimatorMode::GeometricResampling);
    CHECK(estimator_mode_from_string("plug-in") == EstimatorMode::PlugIn);
    CHECK(estimator_mode_from_string(to_string(EstimatorMode::PlugIn)) == EstimatorMode::PlugIn);
    CHECK_THROWS_AS(estimator_mode_from_string("magic"), ConfigError);
}

TEST_CASE("ftpl construction checks") {
    CHECK_THROWS_AS(FtplLearner(kMirror, {}, FtplParams{}), ConfigError);
    CHECK_THROWS_AS(FtplLearner(kMirror, {0}, FtplParams{0.0, 1, 1}), ConfigError);
    CHECK_THROWS_AS(FtplLearner(kMirror, {0}, FtplParams{1.0, 0, 1}), ConfigError);
    CHECK_THROWS_AS(FtplLearner(kMirror, {0}, FtplParams{1.0, 1, 0}), ConfigError);
    CHECK_NOTHROW(FtplLearner(kMirror, {0}, FtplParams{1.0, 1, 1}));
}

TEST_CASE("ftpl draws") {
    SUBCASE("context weights sum the centred history") {
        Rng rng = substream(65, "test");
        const auto cls = random_class(4, 8, rng);
        FtplLearner learner(cls, find_separator(cls), FtplParams{1.0, 4, 1});
        for (int t = 0; t < 10; ++t) {
            const std::size_t h = uniform_index(rng, cls.size());
            const auto fb = feedback_for(random_round(rng, 4, 3), cls[h], random_report(rng, 4), 1);
            learner.update(fb, Policy::point_mass(cls.size(), h), rng);
        }
        std::vector<double> weights(4, 0.0);
        for (const auto& r : learner.history()) {
            for (std::size_t i = 0; i < r.contexts.size(); ++i) {
                weights[static_cast<std::size_t>(r.contexts[i])] += r.losses[i] - 0.5;
            }
        }
        for (std::size_t i = 0; i < 4; ++i) CHECK(learner.context_weights()[i] == doctest::Approx(weights[i]));
        CHECK(erm_oracle_weighted(weights, cls) == erm_oracle(learner.history(), cls));
    }
    SUBCASE("symmetric noise on a mirrored pair") {
        FtplLearner learner(kMirror, {0}, FtplParams{100.0, 1, 1});
        Rng rng = substream(66, "test");
        int zeros = 0;
        for (int i = 0; i < 10000; ++i) zeros += learner.draw(rng) == 0 ? 1 : 0;
        CHECK(std::abs(zeros / 1e4 - 0.5) <= 0.05);
    }
    SUBCASE("fixed seed, fixed draw") {
        Rng rng = substream(67, "test");
        const auto cls = random_class(5, 12, rng);
        FtplLearner learner(cls, find_separator(cls), FtplParams{2.0, 3, 7});
        Rng a = substream(5, "learner"), b = substream(5, "learner");
        for (int i = 0; i < 100; ++i) CHECK(learner.draw(a) == learner.draw(b));
        const auto ra = learner.resample(a);
        const auto rb = learner.resample(b);
        CHECK(ra.realized == rb.realized);
        for (std::size_t h = 0; h < cls.size(); ++h) CHECK(ra.empirical[h] == rb.empirical[h]);
    }
}

TEST_CASE("ftpl follows the unperturbed leader as omega vanishes") {
    Rng rng = substream(68, "test");
    const auto cls = random_class(4, 8, rng);
    const auto sep = find_separator(cls);
    FtplLearner learner(cls, sep, FtplParams{1e-12, 4, 1});
    for (int t = 0; t < 12; ++t) {
        const std::size_t h = uniform_index(rng, cls.size());
        learner.update(feedback_for(random_round(rng, 4, 3), cls[h], random_report(rng, 4), 1),
                       Policy::point_mass(cls.size(), h), rng);
    }
    const std::size_t leader = erm_oracle(learner.history(), cls);
    for (int i = 0; i < 1000; ++i) CHECK(learner.draw(rng) == leader);
}

TEST_CASE("ftpl resampling") {
    Rng rng = substream(69, "test");
    FtplLearner single(kMirror, {0}, FtplParams{1.0, 1, 1});
    for (int i = 0; i < 50; ++i) {
        const auto r = single.resample(rng);
        CHECK(r.empirical[r.realized] == 1.0);
    }
    FtplLearner many(kMirror, {0}, FtplParams{1.0, 1, 400});
    const auto r = many.resample(rng);
    CHECK(r.empirical[0] + r.empirical[1] == doctest::Approx(1.0));
    CHECK(r.empirical[0] * 400 == doctest::Approx(std::round(r.empirical[0] * 400)));
    CHECK(r.empirical[r.realized] > 0.0);
}

TEST_CASE("ftpl loss estimates") {
    const RoundInstance round({0, 1}, {0, 0});
    const AuditReport quiet{1, 1, false};
    const auto fb = feedback_for(round, kMirror[0], quiet, 1);  // observes coordinate 0 with l = 1

    SUBCASE("plug-in divides by the empirical marginal") {
        FtplLearner learner(kMirror, {0}, FtplParams{1.0, 10, 2, EstimatorMode::PlugIn});
        Rng rng = substream(70, "test");
        const auto est = learner.estimate_losses(fb, Policy::uniform(2), rng);
        REQUIRE(est.size() == 4);
        CHECK(est[0] == 2.0);
        CHECK(est[1] == 0.0);
        CHECK(est[2] == 0.0);  // rho1 = 1 is masked for h = (1, 0)
        CHECK(est[3] == 0.0);
        // The floor 1/L caps the factor at L.
        const auto capped = learner.estimate_losses(fb, Policy::point_mass(2, 1), rng);
        CHECK(capped[0] == 10.0);
    }
    SUBCASE("cap L = 1 leaves observed losses as they are") {
        FtplLearner learner(kMirror, {0}, FtplParams{1.0, 1, 1});
        Rng rng = substream(71, "test");
        for (int i = 0; i < 20; ++i) CHECK(learner.estimate_losses(fb, Policy::uniform(2), rng)[0] == 1.0);
    }
    SUBCASE("zero losses need no replay") {
        const auto fb_zero = feedback_for(RoundInstance({0, 1}, {1, 1}), kMirror[0], quiet, 1);
        FtplLearner learner(kMirror, {0}, FtplParams{1.0, 5, 1});
        Rng a = substream(72, "test");
        Rng b = a;
        const auto est = learner.estimate_losses(fb_zero, Policy::uniform(2), a);
        for (double v : est) CHECK(v == 0.0);
        CHECK(a() == b());  // no draws were consumed
    }
    SUBCASE("geometric replay matches the truncated mean") {
        // Empty history and symmetric noise: each replay plays context 0 with probability 1/2.
        constexpr std::size_t L = 3;
        FtplLearner learner(kMirror, {0}, FtplParams{1.0, L, 1});
        Rng rng = substream(73, "test");
        constexpr int n = 100000;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double k = learner.estimate_losses(fb, Policy::uniform(2), rng)[0];
            CHECK(k >= 1.0);
            CHECK(k <= static_cast<double>(L));
            sum += k;
        }
        const double q = 0.5;
        const double expected = (1.0 - std::pow(1.0 - q, L)) / q;  // E[min(Geom(q), L)]
        CHECK(std::abs(sum / n - expected) < 0.015);
    }
}

TEST_CASE("ftpl update accumulates centred estimates") {
    FtplLearner learner(kMirror, {0}, FtplParams{1.0, 1, 1});
    Rng rng = substream(74, "test");
    const auto fb = feedback_for(RoundInstance({0, 1}, {0, 0}), kMirror[0], AuditReport{0, 1, true}, 1);
    learner.update(fb, Policy::uniform(2), rng);
    REQUIRE(learner.history().size() == 1);
    // Augmented contexts (0, 1, 0, 1); estimates (1, 0, 1, 0) with L = 1.
    CHECK(learner.history()[0].losses == std::vector<double>{1.0, 0.0, 1.0, 0.0});
    CHECK(learner.context_weights()[0] == doctest::Approx(1.0));
    CHECK(learner.context_weights()[1] == doctest::Approx(-1.0));
    // Context 1 is now cheaper, so the noiseless leader is (0, 1).
    CHECK(erm_oracle(learner.history(), kMirror) == 1);
}

TEST_CASE("empirical policy helper") {
    int i = 0;
    const Policy p = empirical_policy(3, 4, [&] { return static_cast<std::size_t>(i++ % 2); });
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.5);
    CHECK(p[2] == 0.0);
}
