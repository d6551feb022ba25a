#include "doctest.h"

#include <cmath>

#include "hrm/pipeline.hpp"

using namespace hrm;
using namespace hrm::pipeline;

namespace {

BacktestConfig small_config() {
    BacktestConfig c;
    c.k = 5;
    c.workers = 2;
    return c;
}

} // namespace

TEST_CASE("smoothing interpolation") {
    const auto g11 = interpolate_smoothing(RateLadder(70, 170, 10), 0.1, 0.5);
    REQUIRE(g11.size() == 11);
    for (std::size_t r = 0; r < 11; ++r) {
        CHECK(g11[r] == doctest::Approx(0.1 + 0.04 * static_cast<double>(r)));
    }
    CHECK(interpolate_smoothing(RateLadder(100, 200, 100), 0.4, 0.7) == std::vector<double>{0.4, 0.7});
    const auto g3 = interpolate_smoothing(RateLadder(100, 300, 100), 0.4, 0.7);
    CHECK(g3[1] == doctest::Approx(0.55));
    CHECK(interpolate_smoothing(RateLadder(100, 100, 10), 0.4, 0.7) == std::vector<double>{0.4});
    CHECK_THROWS_AS(interpolate_smoothing(RateLadder(100, 300, 100), -0.1, 0.7), DomainError);
}

TEST_CASE("config validation") {
    BacktestConfig c;
    CHECK(c.forecast() == 28);
    CHECK_NOTHROW(c.validate());
    c.g_low = 0.8;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = {};
    c.warmup = 100;
    CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("history never reaches the target") {
    SyntheticSpec spec;
    spec.first_checkin = parse_date("2019-01-01");
    spec.days = 60;
    const auto src = generate_synthetic_history(spec);
    const Date target = parse_date("2019-02-20");
    for (Date d : history_for(src, target, small_config())) {
        CHECK(d < target);
        CHECK(std::chrono::weekday{d} == std::chrono::weekday{target});
    }
    auto any_day = small_config();
    any_day.same_weekday = false;
    CHECK(history_for(src, target, any_day).size() == 50);
}

TEST_CASE("synthetic backtest") {
    SyntheticSpec spec;
    spec.first_checkin = parse_date("2019-01-07");
    spec.days = 91;
    const auto src = generate_synthetic_history(spec);
    std::vector<Date> targets;
    for (int i = 70; i < 91; ++i) {
        targets.push_back(spec.first_checkin + std::chrono::days{i});
    }
    const auto report = run_backtest(src, targets, small_config());
    REQUIRE(report.targets.size() == targets.size());
    CHECK(report.hygiene_checks == targets.size() * 5);

    double sum = 0;
    std::size_t n = 0;
    for (const auto& row : report.targets) {
        CHECK_FALSE(row.skipped.has_value());
        CHECK(row.selected.size() == 5);
        for (const auto& s : row.selected) {
            CHECK(s.date < row.target);
        }
        // the dearest rate is never on sale in this history
        for (std::size_t r = 0; r < 4; ++r) {
            CHECK(row.excluded[r] == (row.observed_days[r] < 3));
        }
        CHECK(row.excluded[3]);
        CHECK_FALSE(row.rate_wape[3].has_value());
        if (row.percent_change) {
            sum += *row.percent_change;
            ++n;
        }
    }
    REQUIRE(n > 0);
    CHECK(sum / static_cast<double>(n) > 0);

    // aggregates recompute from the rows
    const auto again = aggregate_by_weekday(report.targets);
    REQUIRE(again.size() == 8);
    CHECK(again.back().key == "Overall");
    CHECK(again.back().count == n);
    CHECK(*again.back().mean == doctest::Approx(sum / static_cast<double>(n)).epsilon(1e-12));
    for (std::size_t i = 0; i < again.size(); ++i) {
        CHECK(again[i].count == report.by_weekday[i].count);
        CHECK(again[i].mean == report.by_weekday[i].mean);
        CHECK(again[i].sd == report.by_weekday[i].sd);
    }

    const auto table = weekday_table_csv(report);
    CHECK(table.rfind("day,n,mean_pct,sd_pct\nMon,", 0) == 0);
    const auto rates = rate_wape_csv(report);
    CHECK(rates.find("rate_100,rate_200,rate_300,rate_400") != std::string::npos);
    CHECK(rates.find(",-\n") != std::string::npos);
}

TEST_CASE("identical history") {
    SyntheticSpec spec;
    spec.first_checkin = parse_date("2019-03-04");
    spec.days = 1;
    auto one = generate_synthetic_history(spec).load(spec.first_checkin);
    std::vector<DemandScenario> copies;
    for (int w = 0; w < 6; ++w) {
        DemandScenario s = one;
        s.checkin = spec.first_checkin + std::chrono::weeks{w};
        copies.push_back(s);
    }
    const MemorySource src(RateLadder(100, 400, 100), 100, copies);
    const Date target = spec.first_checkin + std::chrono::weeks{5};
    const auto row = backtest_target(src, target, small_config());
    REQUIRE(row.selected.size() == 5);
    for (const auto& s : row.selected) {
        CHECK(s.wape == 0.0);
    }
    REQUIRE(row.percent_change.has_value());
    CHECK(*row.percent_change == doctest::Approx(100.0 * (row.expected_revenue - row.actual_revenue) /
                                                 row.actual_revenue));
}

TEST_CASE("no history is reported, not fitted") {
    SyntheticSpec spec;
    spec.first_checkin = parse_date("2019-03-04");
    spec.days = 3;
    const auto src = generate_synthetic_history(spec);
    const auto row = backtest_target(src, spec.first_checkin, small_config());
    CHECK(row.skipped.has_value());
    CHECK(row.selected.empty());
    CHECK(row.expected_revenue == 0.0);
}

TEST_CASE("a leaking source trips the hygiene check") {
    // a source whose date index lies about what it returns
    class Leaky : public ScenarioSource {
    public:
        explicit Leaky(MemorySource inner) : inner_(std::move(inner)) {}
        const RateLadder& ladder() const override { return inner_.ladder(); }
        int horizon() const override { return inner_.horizon(); }
        std::vector<Date> dates() const override { return inner_.dates(); }
        DemandScenario load(Date d) const override {
            auto s = inner_.load(d);
            s.checkin += std::chrono::days{400};
            return s;
        }

    private:
        MemorySource inner_;
    };
    SyntheticSpec spec;
    spec.first_checkin = parse_date("2019-01-07");
    spec.days = 30;
    const Leaky src(generate_synthetic_history(spec));
    CHECK_THROWS_AS(backtest_target(src, parse_date("2019-02-04"), small_config()), TemporalLeak);
}

TEST_CASE("evidence days") {
    DemandScenario a(parse_date("2020-01-01"), 2, 5);
    a.at(1, 2) = 1;
    a.at(1, 4) = 1;
    DemandScenario b = a;
    b.observed = {{true, true, true, true, true}, {false, false, false, false, true}};
    const std::vector<DemandScenario> unmasked{a};
    CHECK(evidence_days(unmasked, 1, 5) == std::vector<std::size_t>{0, 2});
    const std::vector<DemandScenario> both{a, b};
    CHECK(evidence_days(both, 1, 5) == std::vector<std::size_t>{5, 3});
}
