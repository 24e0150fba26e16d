#include <sstream>
#include <string>

#include "doctest.h"
#include "panelfair/auditing.hpp"
#include "panelfair/builders.hpp"
#include "panelfair/config.hpp"
#include "panelfair/errors.hpp"
#include "panelfair/learners.hpp"
#include "panelfair/verify.hpp"

using namespace panelfair;

TEST_CASE("randomized checks pass") {
    const auto ident = check_reduction_identities(2000, 3);
    CHECK(ident.pass);
    CHECK(ident.trials == 2000);
    CHECK(ident.max_discrepancy < 1e-9);

    const auto equiv = check_representative_equivalence(2000, 4);
    CHECK(equiv.pass);
    CHECK(equiv.max_discrepancy == 0.0);

    const auto joint = check_joint_loss(100, 5);
    CHECK(joint.pass);

    const auto conc = check_estimation_concentration(20, 2000, 0.05, 3, 6);
    CHECK(conc.pass);
    CHECK_THROWS_AS(check_estimation_concentration(20, 9, 0.05, 3, 6), ConfigError);
}

TEST_CASE("gap example") {
    const auto uniform = gap_example_values(0.2, 0.1, Policy::uniform(2));
    CHECK(uniform.realized_unfairness == 1.0);
    CHECK(uniform.policy_unfairness == 0.0);
    CHECK(gap_example_values(0.2, 0.1, Policy({0.6, 0.4})).policy_unfairness == 0.0);
    CHECK(gap_example_values(0.2, 0.1, Policy({0.9, 0.1})).policy_unfairness == 1.0);
    CHECK(gap_example_values(1.0, 0.1, Policy::uniform(2)).realized_unfairness == 0.0);
    CHECK(check_gap_example().pass);
}

TEST_CASE("one vote out of m picks the closest auditor") {
    Rng rng = substream(91, "test");
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 2 + uniform_index(rng, 5);
        std::vector<DistanceFunction> members;
        for (std::size_t j = 0; j < m; ++j) members.push_back(random_distance(4, 0.0, 1.0, 0.1, rng));
        const Panel panel(members, 0.05, 1.0 / static_cast<double>(m));
        CHECK(panel.required_votes() == 1);
        const std::size_t rep = representative_index(panel, 0, 1);
        for (std::size_t j = 0; j < m; ++j) CHECK(members[rep](0, 1) <= members[j](0, 1));
        const double px = uniform01(rng), pxp = uniform01(rng);
        bool any = false;
        for (const auto& d : members) any = any || alpha_violation(px, pxp, d(0, 1), 0.05);
        CHECK(panel_violation(px, pxp, panel, 0, 1) == any);
    }
}

TEST_CASE("identical members act as one auditor") {
    Rng rng = substream(92, "test");
    const auto d = random_distance(4, 0.0, 1.0, 0.0, rng);
    for (double gamma : {0.2, 0.5, 1.0}) {
        const Panel panel(std::vector<DistanceFunction>(5, d), 0.1, gamma);
        for (int trial = 0; trial < 200; ++trial) {
            const double px = uniform01(rng), pxp = uniform01(rng);
            CHECK(panel_violation(px, pxp, panel, 1, 2) == alpha_violation(px, pxp, d(1, 2), 0.1));
        }
        CHECK(representative_index(panel, 1, 2) == panel.required_votes() - 1);
    }
}

TEST_CASE("resampling a point mass reproduces it exactly") {
    Rng rng = substream(93, "test");
    const Policy p = Policy::point_mass(6, 4);
    const Policy hat = empirical_policy(6, 50, [&] { return sample_hypothesis(p, rng); });
    for (std::size_t h = 0; h < 6; ++h) CHECK(hat[h] == p[h]);
}

TEST_CASE("full report") {
    VerifyOptions o;
    o.identity_trials = 300;
    o.equivalence_trials = 300;
    o.joint_loss_trials = 30;
    o.concentration_R = 500;
    o.concentration_replicates = 2;
    o.parallel = true;
    const auto a = run_verification(o);
    o.parallel = false;
    const auto b = run_verification(o);
    CHECK(a.all_pass());
    REQUIRE(a.checks.size() == b.checks.size());
    CHECK(a.checks.size() == 5);
    for (std::size_t i = 0; i < a.checks.size(); ++i) {
        CHECK(a.checks[i].name == b.checks[i].name);
        CHECK(a.checks[i].max_discrepancy == b.checks[i].max_discrepancy);
    }
    const Json j = Json::parse(a.to_json());
    REQUIRE(j.is_array());
    CHECK(j.size() == a.checks.size());
    CHECK(j[0].contains("tolerance"));
    std::ostringstream table;
    a.print_table(table);
    for (const auto& c : a.checks) CHECK(table.str().find(c.name) != std::string::npos);

    VerificationReport failing = a;
    failing.checks[0].pass = false;
    CHECK_FALSE(failing.all_pass());
}
