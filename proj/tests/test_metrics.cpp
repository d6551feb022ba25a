#include "doctest.h"

#include <algorithm>
#include <random>

#include "hrm/metrics.hpp"

using namespace hrm;
using namespace hrm::metrics;

TEST_CASE("wape examples") {
    const std::vector<double> a{1, 2, 3};
    CHECK(wape(a, a).value == 0.0);
    const auto r = wape(a, std::vector<double>{2, 2, 2});
    CHECK(r.value == doctest::Approx(1.0 / 3.0));
    CHECK(r.numerator == doctest::Approx(2.0));
    CHECK(r.denominator == doctest::Approx(6.0));
    CHECK_THROWS_AS(wape(std::vector<double>{0, 0}, std::vector<double>{1, 1}), MetricError);
    CHECK_THROWS_AS(wape(std::vector<double>{1}, std::vector<double>{1, 1}), MetricError);
}

TEST_CASE("wape properties") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0, 10);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(1 + trial % 20), f(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = u(rng);
            f[i] = u(rng);
        }
        const double c = 0.1 + u(rng);
        std::vector<double> ca(a), cf(f);
        for (std::size_t i = 0; i < a.size(); ++i) {
            ca[i] *= c;
            cf[i] *= c;
        }
        CHECK(wape(ca, cf).value == doctest::Approx(wape(a, f).value).epsilon(1e-12));
        CHECK(wape(a, std::vector<double>(a.size(), 0.0)).value == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(wape(a, a).value == 0.0);
    }
}

TEST_CASE("revenue percent change") {
    CHECK(revenue_percent_change(100, 110) == doctest::Approx(10.0));
    CHECK(revenue_percent_change(150, 150) == 0.0);
    CHECK(revenue_percent_change(200, 190) == doctest::Approx(-5.0));
    CHECK_THROWS_AS(revenue_percent_change(0, 10), MetricError);
    CHECK_THROWS_AS(revenue_percent_change(-1, 10), MetricError);
}

TEST_CASE("input date selection") {
    const std::vector<double> target{10, 20, 30, 40};
    const std::vector<Candidate> cands{
        {parse_date("2019-01-03"), {10, 20, 30, 40}},
        {parse_date("2019-01-10"), {0, 0, 0, 0}},
        {parse_date("2019-01-17"), {12, 20, 30, 40}},
    };
    SUBCASE("exact match first") {
        const auto s = select_input_dates(target, cands, 2);
        REQUIRE(s.chosen.size() == 2);
        CHECK(s.chosen[0].date == parse_date("2019-01-03"));
        CHECK(s.chosen[0].wape == 0.0);
        CHECK(s.chosen[1].date == parse_date("2019-01-17"));
        CHECK_FALSE(s.short_of_k);
    }
    SUBCASE("fewer than k returns all with a flag") {
        const auto s = select_input_dates(target, cands, 5);
        CHECK(s.chosen.size() == 3);
        CHECK(s.short_of_k);
    }
    SUBCASE("ties break by earlier date") {
        const std::vector<Candidate> tied{{parse_date("2019-02-07"), {11, 20, 30, 40}},
                                          {parse_date("2019-01-31"), {9, 20, 30, 40}}};
        const auto s = select_input_dates(target, tied, 1);
        CHECK(s.chosen[0].date == parse_date("2019-01-31"));
    }
}

TEST_CASE("selection keeps the smallest wape values") {
    // targets chosen so the candidates score 0.1, 0.3 and 0.2
    const std::vector<double> target{10, 10};
    const std::vector<Candidate> cands{{parse_date("2019-01-01"), {11, 11}},
                                       {parse_date("2019-01-02"), {13, 13}},
                                       {parse_date("2019-01-03"), {12, 12}}};
    const auto s = select_input_dates(target, cands, 2);
    REQUIRE(s.chosen.size() == 2);
    CHECK(s.chosen[0].wape == doctest::Approx(0.1));
    CHECK(s.chosen[1].wape == doctest::Approx(0.2));
}

TEST_CASE("selection does not depend on candidate order") {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> v(0, 5);
    std::vector<double> target(8);
    for (auto& x : target) {
        x = v(rng) + 1;
    }
    std::vector<Candidate> cands;
    for (int i = 0; i < 20; ++i) {
        Candidate c{parse_date("2019-01-01") + std::chrono::days{7 * i}, std::vector<double>(8)};
        for (auto& x : c.series) {
            x = v(rng);
        }
        cands.push_back(c);
    }
    const auto base = select_input_dates(target, cands, 7);
    for (int shuffle = 0; shuffle < 20; ++shuffle) {
        std::shuffle(cands.begin(), cands.end(), rng);
        const auto s = select_input_dates(target, cands, 7);
        REQUIRE(s.chosen.size() == base.chosen.size());
        for (std::size_t i = 0; i < s.chosen.size(); ++i) {
            CHECK(s.chosen[i].date == base.chosen[i].date);
        }
    }
}

TEST_CASE("revenue series reads the per-day revenue") {
    DemandScenario s(parse_date("2020-01-01"), 1, 5);
    s.revenue = {1, 2, 3, 4, 5};
    CHECK(revenue_series(s, 2, 4) == std::vector<double>{2, 3, 4});
}
