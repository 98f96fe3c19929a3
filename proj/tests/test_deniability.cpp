#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pridetect/deniability.hpp"
#include "pridetect/errors.hpp"
#include "pridetect/rng.hpp"

using namespace pridetect;

namespace {

PriScoreVector vec(std::initializer_list<double> values) {
    PriScoreVector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

bool has_violation(const std::vector<PropositionViolation>& violations, const std::string& name) {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const PropositionViolation& v) { return v.name == name; });
}

} // namespace

TEST_CASE("indistinguishability_ratio divides posterior by prior") {
    CHECK(indistinguishability_ratio(0.5, 0.5) == doctest::Approx(1.0));
    CHECK(indistinguishability_ratio(0.75, 0.25) == doctest::Approx(3.0));
    CHECK(indistinguishability_ratio(0.0, 0.1) == 0.0);
    CHECK_THROWS_AS(indistinguishability_ratio(0.5, 0.0), ArgumentError);
    CHECK_THROWS_AS(indistinguishability_ratio(0.5, -0.2), ArgumentError);
    CHECK_THROWS_AS(indistinguishability_ratio(-0.1, 0.5), ArgumentError);
}

TEST_CASE("delta_k is the component spread divided by the topic count") {
    CHECK(delta_k(vec({1.0, 1.0, 1.0})) == 0.0);
    CHECK(delta_k(vec({1.5, 0.5})) == doctest::Approx(0.5));
    CHECK(delta_k(vec({2.0, 0.5, 1.0, 1.5})) == doctest::Approx(1.5 / 4.0));
    CHECK(delta_k(vec({7.0})) == 0.0);
    CHECK_THROWS_AS(delta_k(PriScoreVector{}), ArgumentError);
}

TEST_CASE("delta_star takes the worst per-page spread of a session") {
    const std::vector<PriScoreVector> session = {
        vec({1.1, 0.9}), vec({1.3, 0.7}), vec({1.2, 0.8})}; // spreads 0.1, 0.3, 0.2
    CHECK(delta_star(session) == doctest::Approx(0.3));
    CHECK(delta_star({vec({1.0, 1.0})}) == 0.0);
    CHECK_THROWS_AS(delta_star({}), ArgumentError);

    // appending pages can only keep or raise the worst case
    Rng rng(555);
    std::vector<PriScoreVector> growing;
    double previous = 0.0;
    for (int i = 0; i < 50; ++i) {
        PriScoreVector page(3);
        for (int j = 0; j < 3; ++j) page[j] = rng.real01() * 2.0;
        growing.push_back(page);
        const double current = delta_star(growing);
        CHECK(current >= previous);
        previous = current;
    }
}

TEST_CASE("epsilon_bound is the worst absolute log-evidence over a session") {
    CHECK(epsilon_bound({vec({1.0, 1.0}), vec({1.0, 1.0})}) == 0.0);
    CHECK(epsilon_bound({vec({std::exp(1.0), 1.0})}) == doctest::Approx(1.0));
    CHECK(epsilon_bound({vec({0.5, 1.0})}) == doctest::Approx(std::log(2.0)));
    CHECK(epsilon_bound({vec({1.0, 1.0}), vec({0.0, 2.0})}) ==
          std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(epsilon_bound({vec({-0.1, 1.0})}), ArgumentError);
    CHECK_THROWS_AS(epsilon_bound({}), ArgumentError);
}

TEST_CASE("check_propositions accepts uninformative observations") {
    const Eigen::VectorXd priors = vec({0.25, 0.25, 0.25, 0.25});
    // posterior equal to the priors: every movement ratio is exactly one
    PriScoreVector movement(4);
    for (int i = 0; i < 4; ++i) movement[i] = indistinguishability_ratio(priors[i], priors[i]);
    CHECK(movement.mean() == doctest::Approx(1.0));
    CHECK(check_propositions(movement, priors, priors).empty());
}

TEST_CASE("check_propositions holds on random consistent draws") {
    Rng rng(20260819);
    int checked = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(2, 8));
        Eigen::VectorXd priors(n);
        for (int i = 0; i < n; ++i) priors[i] = 0.01 + rng.real01();
        priors /= priors.sum();
        Eigen::VectorXd posterior(n);
        for (int i = 0; i < n; ++i) posterior[i] = 0.001 + rng.real01();
        posterior /= posterior.sum();

        PriScoreVector movement(n);
        for (int i = 0; i < n; ++i) {
            movement[i] = indistinguishability_ratio(posterior[i], priors[i]);
        }

        const auto violations = check_propositions(movement, priors, posterior);
        CHECK(violations.empty());
        if (!violations.empty()) {
            for (const auto& v : violations) {
                MESSAGE("violation " << v.name << " margin " << v.margin);
            }
        }

        // direct longhand oracle for the mass bounds
        const double sum = movement.sum();
        CHECK(sum >= 1.0 / priors.maxCoeff() - 1e-9);
        CHECK(sum <= 1.0 / priors.minCoeff() + 1e-9);
        ++checked;
    }
    CHECK(checked == 10000);
}

TEST_CASE("check_propositions reports violated propositions by name") {
    const Eigen::VectorXd uniform = vec({0.5, 0.5});

    // movement mass far below what the priors allow
    const auto low = check_propositions(vec({0.5, 0.5}), uniform, uniform);
    CHECK(low.size() == 2);
    CHECK(has_violation(low, "chain:lower"));
    CHECK(has_violation(low, "sum:lower"));

    // movement mass far above: the mirrored pair fires
    const auto high = check_propositions(vec({2.0, 2.0}), uniform, uniform);
    CHECK(high.size() == 2);
    CHECK(has_violation(high, "chain:upper"));
    CHECK(has_violation(high, "sum:upper"));
    for (const auto& v : high) CHECK(v.margin > 0.0);

    // the deniability band only breaks when the posterior abuses the
    // normalization tolerance: all components equally off-uniform
    const double off = 1.0 / 3.0 + 1e-10;
    const auto band =
        check_propositions(vec({1.0, 1.0, 1.0}), vec({1.0 / 3, 1.0 / 3, 1.0 / 3}),
                           vec({off, off, off}));
    CHECK(band.size() == 3);
    CHECK(has_violation(band, "deniability:band"));
}

TEST_CASE("check_propositions validates its inputs") {
    const Eigen::VectorXd uniform = vec({0.5, 0.5});
    CHECK_THROWS_AS(check_propositions(PriScoreVector{}, Eigen::VectorXd{}, Eigen::VectorXd{}),
                    ArgumentError);
    CHECK_THROWS_AS(check_propositions(vec({1.0, 1.0}), vec({1.0}), uniform), ArgumentError);
    CHECK_THROWS_AS(check_propositions(vec({1.0, 1.0}), uniform, vec({0.5, 0.5, 0.0})),
                    ArgumentError);
    CHECK_THROWS_AS(check_propositions(vec({1.0, 1.0}), vec({0.0, 1.0}), uniform), ArgumentError);
    CHECK_THROWS_AS(check_propositions(vec({1.0, 1.0}), vec({-0.5, 1.5}), uniform),
                    ArgumentError);
    CHECK_THROWS_AS(check_propositions(vec({1.0, 1.0}), uniform, vec({0.7, 0.7})), ArgumentError);
    CHECK_THROWS_AS(check_propositions(vec({1.0, 1.0}), uniform, vec({1.2, -0.2})),
                    ArgumentError);
}

TEST_CASE("under uniform priors the spread equals the posterior gap exactly") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(2, 6));
        const Eigen::VectorXd priors = Eigen::VectorXd::Constant(n, 1.0 / n);
        Eigen::VectorXd posterior(n);
        for (int i = 0; i < n; ++i) posterior[i] = 0.001 + rng.real01();
        posterior /= posterior.sum();

        PriScoreVector movement(n);
        for (int i = 0; i < n; ++i) {
            movement[i] = indistinguishability_ratio(posterior[i], priors[i]);
        }
        const double gap = posterior.maxCoeff() - posterior.minCoeff();
        CHECK(delta_k(movement) == doctest::Approx(gap).epsilon(1e-12));
        CHECK(check_propositions(movement, priors, posterior).empty());
    }
}

TEST_CASE("make_deniability_report summarizes a session under uniform priors") {
    const Eigen::VectorXd uniform = vec({0.5, 0.5});
    const std::vector<PriScoreVector> session = {vec({1.5, 0.5}), vec({1.0, 1.0})};

    const DeniabilityReport report = make_deniability_report(session, uniform);
    REQUIRE(report.delta_per_step.size() == 2);
    CHECK(report.delta_per_step[0] == doctest::Approx(0.5));
    CHECK(report.delta_per_step[1] == 0.0);
    CHECK(report.delta_star == doctest::Approx(0.5));
    CHECK(report.epsilon == doctest::Approx(std::log(2.0)));

    // a zero component means unbounded log-evidence
    const DeniabilityReport zeroed = make_deniability_report({vec({0.0, 2.0})}, uniform);
    CHECK(zeroed.epsilon == std::numeric_limits<double>::infinity());
    CHECK(zeroed.delta_star == doctest::Approx(1.0));
}

TEST_CASE("make_deniability_report refuses skewed priors but accepts near-uniform ones") {
    const std::vector<PriScoreVector> session = {vec({1.0, 1.0})};
    CHECK_THROWS_AS(make_deniability_report(session, vec({0.7, 0.3})), ArgumentError);
    CHECK_THROWS_AS(make_deniability_report(session, Eigen::VectorXd{}), ArgumentError);
    CHECK_NOTHROW(make_deniability_report(session, vec({0.505, 0.495})));
    CHECK_THROWS_AS(make_deniability_report({}, vec({0.5, 0.5})), ArgumentError);
}
