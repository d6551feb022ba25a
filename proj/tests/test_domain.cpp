#include "doctest.h"

#include <random>

#include "hrm/domain.hpp"

using namespace hrm;

namespace {

DemandScenario raw_totals(const std::vector<int>& per_rate) {
    DemandScenario s(parse_date("2018-06-07"), per_rate.size(), 3);
    for (std::size_t r = 0; r < per_rate.size(); ++r) {
        s.at(r, 1) = per_rate[r];
    }
    return s;
}

} // namespace

TEST_CASE("dates round-trip through ISO text") {
    CHECK(format_date(parse_date("2019-06-06")) == "2019-06-06");
    CHECK_THROWS_AS(parse_date("2019-13-01"), DomainError);
    CHECK_THROWS_AS(parse_date("06/06/2019"), DomainError);
}

TEST_CASE("rate ladder") {
    const RateLadder l(70, 170, 10);
    CHECK(l.size() == 11);
    CHECK(l[0] == 70);
    CHECK(l[10] == 170);
    CHECK(l.bin(70).index == 0);
    CHECK(l.bin(79.99).index == 0);
    CHECK(l.bin(80).index == 1);
    CHECK_FALSE(l.bin(170).clamped);
    CHECK(l.bin(500).clamped);
    CHECK(l.bin(500).index == 10);
    CHECK(l.bin(10).clamped);
    CHECK(l.bin(10).index == 0);
    CHECK_THROWS_AS(RateLadder(100, 50, 10), DomainError);
    CHECK_THROWS_AS(RateLadder(100, 150, 0), DomainError);
}

TEST_CASE("booking horizon needs three days") {
    CHECK_THROWS_AS(BookingHorizon(2), DomainError);
    CHECK(BookingHorizon(3).length == 3);
}

TEST_CASE("lead time to horizon index") {
    CHECK(to_booking_horizon(0, 365) == 365);
    CHECK(to_booking_horizon(365, 365) == 0);
    CHECK(to_booking_horizon(28, 100) == 72);
    CHECK_THROWS_AS(to_booking_horizon(-1, 100), DomainError);
}

TEST_CASE("lead time mapping is an order-reversing bijection") {
    const int T = 40;
    for (int lead = 0; lead <= T; ++lead) {
        const int t = to_booking_horizon(lead, T);
        CHECK(t >= 0);
        CHECK(t <= T);
        CHECK(to_booking_horizon(T - t, T) == t);
        if (lead > 0) {
            CHECK(t < to_booking_horizon(lead - 1, T));
        }
    }
}

TEST_CASE("choice-set cumulation") {
    // index 0 is the cheapest rate
    SUBCASE("two rates") {
        const auto c = cumulate_choice_sets(raw_totals({55, 75}));
        CHECK(c.at(0, 1) == 130);
        CHECK(c.at(1, 1) == 75);
    }
    SUBCASE("single rate is unchanged") {
        const auto c = cumulate_choice_sets(raw_totals({75}));
        CHECK(c.at(0, 1) == 75);
        CHECK(c.cumulated);
    }
    SUBCASE("running sum from the top") {
        const auto c = cumulate_choice_sets(raw_totals({2, 3, 5}));
        CHECK(c.at(0, 1) == 10);
        CHECK(c.at(1, 1) == 8);
        CHECK(c.at(2, 1) == 5);
    }
    SUBCASE("twice is rejected") {
        const auto c = cumulate_choice_sets(raw_totals({1, 2}));
        CHECK_THROWS_AS(cumulate_choice_sets(c), DomainError);
    }
}

TEST_CASE("cumulation properties on random scenarios") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> count(0, 9);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t R = 1 + trial % 6;
        DemandScenario raw(parse_date("2020-01-01"), R, 10);
        for (std::size_t r = 0; r < R; ++r) {
            for (int t = 1; t <= 10; ++t) {
                raw.at(r, t) = count(rng);
            }
        }
        const auto cum = cumulate_choice_sets(raw);
        for (int t = 1; t <= 10; ++t) {
            CHECK(cum.at(R - 1, t) == raw.at(R - 1, t));
            CHECK(cum.at(0, t) == raw.day_total(t));
            for (std::size_t r = 0; r + 1 < R; ++r) {
                CHECK(cum.at(r, t) >= cum.at(r + 1, t));
            }
        }
    }
}

TEST_CASE("choice sets are nested by price") {
    const auto sets = choice_sets(RateLadder(100, 300, 100));
    REQUIRE(sets.size() == 3);
    CHECK(sets[0].members == std::vector<Money>{100, 200, 300});
    CHECK(sets[2].members == std::vector<Money>{300});
    for (std::size_t i = 0; i + 1 < sets.size(); ++i) {
        CHECK(sets[i + 1].members.size() < sets[i].members.size());
    }
}

TEST_CASE("observation mask") {
    DemandScenario s(parse_date("2020-01-01"), 2, 3);
    CHECK(s.is_observed(1, 2));
    s.observed = {{true, false, false}, {false, true, false}};
    CHECK(s.is_observed(0, 1));
    CHECK_FALSE(s.is_observed(0, 2));
    CHECK(s.is_observed(1, 2));
}
