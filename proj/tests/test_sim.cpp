#include "doctest.h"

#include <cmath>
#include <numeric>

#include "hrm/sim.hpp"

using namespace hrm;
using namespace hrm::sim;

TEST_CASE("reference curves") {
    const auto c = generate_true_curves({});
    CHECK(c.individual(2, 28) == doctest::Approx(0.02 * std::exp(0.18 * 28)));
    CHECK(c.individual(2, 28) == doctest::Approx(3.092).epsilon(1e-3));
    CHECK(c.individual(1, 0) == 0.0);
    CHECK(c.individual(1, 10) == doctest::Approx(1.6));
    for (double t = 0; t <= 28; t += 0.5) {
        CHECK(c.cumulated(0, t) ==
              doctest::Approx(c.individual(0, t) + c.individual(1, t) + c.individual(2, t)));
        CHECK(c.cumulated(0, t) >= c.cumulated(1, t));
        CHECK(c.cumulated(1, t) >= c.cumulated(2, t));
        CHECK(c.individual(0, t) >= 0.0);
    }
    CHECK(c.clamped_evaluations() == 0);
}

TEST_CASE("the literal low-rate form is clamped and counted") {
    TrueCurveSpec spec;
    spec.form = LowRateForm::literal_clamped;
    const auto c = generate_true_curves(spec);
    CHECK(c.individual(0, 1) == doctest::Approx(0.43 * std::sin(1.0)));
    CHECK(c.individual(0, 4) == 0.0); // sin(4) < 0
    CHECK(c.clamped_evaluations() > 0);
}

TEST_CASE("simulation is reproducible and masks the open rate") {
    const auto curves = generate_true_curves({});
    std::mt19937_64 a(5), b(5);
    const auto s1 = simulate_scenarios(curves, 4, {}, a);
    const auto s2 = simulate_scenarios(curves, 4, {}, b);
    REQUIRE(s1.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(s1[i].counts == s2[i].counts);
        CHECK(s1[i].observed == s2[i].observed);
        CHECK(s1[i].cumulated);
        for (int t = 1; t <= 28; ++t) {
            int open = 0;
            for (std::size_t r = 0; r < 3; ++r) {
                open += s1[i].is_observed(r, t) ? 1 : 0;
                if (!s1[i].is_observed(r, t)) {
                    CHECK(s1[i].at(r, t) == 0);
                }
            }
            CHECK(open == 1);
        }
    }
}

TEST_CASE("open weights pin the open rate") {
    const auto curves = generate_true_curves({});
    std::mt19937_64 rng(1);
    const auto s = simulate_scenarios(curves, 1, {0.0, 0.0, 1.0}, rng);
    for (int t = 1; t <= 28; ++t) {
        CHECK(s[0].is_observed(2, t));
        CHECK_FALSE(s[0].is_observed(0, t));
    }
}

TEST_CASE("poisson draws match the rate") {
    std::mt19937_64 rng(99);
    std::poisson_distribution<int> d(2.0);
    double sum = 0;
    for (int i = 0; i < 10000; ++i) {
        sum += d(rng);
    }
    const double mean = sum / 10000;
    CHECK(mean >= 1.96);
    CHECK(mean <= 2.04);
}

TEST_CASE("config validation") {
    SimConfig c;
    CHECK_NOTHROW(c.validate());
    c.open_weights = {0.5, 0.5, 0.5};
    CHECK_THROWS(c.validate());
    c.open_weights = {};
    c.smoothing_sets = {{0.1, 1.2, 0.3}};
    CHECK_THROWS(c.validate());
    c.smoothing_sets = {{0.1, 0.2, 0.3}};
    c.scenarios = 0;
    CHECK_THROWS(c.validate());
}

TEST_CASE("box statistics") {
    const auto b = box_stats({4, 1, 3, 2, 5});
    CHECK(b.min == 1);
    CHECK(b.max == 5);
    CHECK(b.median == 3);
    CHECK(b.q1 == 2);
    CHECK(b.q3 == 4);
    CHECK(b.mean == 3);
    CHECK(box_stats({}).count == 0);
}

TEST_CASE("derived seeds differ per stream and repeat per key") {
    CHECK(derive_seed(1, 2, 3, 4) == derive_seed(1, 2, 3, 4));
    CHECK(derive_seed(1, 2, 3, 4) != derive_seed(1, 2, 3, 5));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}

TEST_CASE("small study is a pure function of the seed") {
    SimConfig c;
    c.scenarios = 8;
    c.out_of_sample = 10;
    c.smoothing_sets = {{0.7, 0.8, 0.9}};
    c.seed = 3;
    const auto r1 = run_simulation_study(c);
    const auto r2 = run_simulation_study(c);
    REQUIRE(r1.studies.size() == 1);
    CHECK(r1.studies[0].expected_revenue == r2.studies[0].expected_revenue);
    CHECK(r1.studies[0].in_sample_wape == r2.studies[0].in_sample_wape);
    CHECK(r1.studies[0].in_sample_wape.size() == 3);
    CHECK(r1.studies[0].out_of_sample.size() == 3);
    CHECK(r1.true_revenue > 0);
}

TEST_CASE("sensitivity sweep bookkeeping") {
    SensitivityConfig sc;
    sc.base.smoothing_sets = {{0.7, 0.8, 0.9}};
    sc.min_scenarios = 10;
    sc.max_scenarios = 10;
    sc.repetitions = 1;
    const auto one = run_sensitivity(sc);
    REQUIRE(one.size() == 1);
    CHECK(one[0].runs == 1);
    CHECK_FALSE(one[0].cells[0].sd.has_value());
    CHECK_FALSE(one[0].cells[0].ci_low.has_value());

    sc.max_scenarios = 12;
    sc.repetitions = 3;
    const auto t = run_sensitivity(sc);
    CHECK(t[0].runs == 9);
    REQUIRE(t[0].cells.size() == 3);
    for (const auto& cell : t[0].cells) {
        REQUIRE(cell.ci_low.has_value());
        CHECK(*cell.ci_low <= cell.mean);
        CHECK(*cell.ci_high >= cell.mean);
        CHECK(cell.mean == doctest::Approx(std::accumulate(cell.revenues.begin(), cell.revenues.end(), 0.0) / 3));
    }
    sc.max_scenarios = 5;
    CHECK_THROWS(run_sensitivity(sc));
}
