#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrm/domain.hpp"
#include "hrm/metrics.hpp"
#include "hrm/spline.hpp"

namespace hrm::pipeline {

struct BacktestConfig {
    int horizon = 100;
    int warmup = 72; ///< days 1..warmup pick the input dates; the rest is forecast and priced
    std::size_t k = 15;
    double g_low = 0.4;  ///< smoothing at the cheapest rate
    double g_high = 0.7; ///< smoothing at the dearest rate
    int subdivisions = 8;
    bool same_weekday = true;
    bool anscombe = false;
    std::size_t workers = 0;

    int forecast() const { return horizon - warmup; }
    void validate() const;
};

/// g per rate, linear in the rate index from g_low to g_high.
std::vector<double> interpolate_smoothing(const RateLadder& ladder, double g_low, double g_high);

/// Read-only access to raw demand scenarios of one property.
class ScenarioSource {
public:
    virtual ~ScenarioSource() = default;
    virtual const RateLadder& ladder() const = 0;
    virtual int horizon() const = 0;
    /// All stored check-in dates, ascending.
    virtual std::vector<Date> dates() const = 0;
    virtual DemandScenario load(Date checkin) const = 0;
};

/// Scenarios held in memory, for tests and generated data.
class MemorySource : public ScenarioSource {
public:
    MemorySource(RateLadder ladder, int horizon, std::vector<DemandScenario> scenarios);

    const RateLadder& ladder() const override { return ladder_; }
    int horizon() const override { return horizon_; }
    std::vector<Date> dates() const override;
    DemandScenario load(Date checkin) const override;

private:
    RateLadder ladder_;
    int horizon_;
    std::vector<DemandScenario> scenarios_;
};

/// A scenario dated on or after the target reached a fit.
class TemporalLeak : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct TargetResult {
    Date target{};
    std::vector<metrics::RankedCandidate> selected;
    bool short_of_k = false;
    std::vector<double> smoothing;
    /// Per rate: days in the forecast window with evidence the rate was on sale.
    std::vector<std::size_t> observed_days;
    std::vector<bool> excluded;
    std::optional<spline::FitDiagnostics> diagnostics;
    int capacity = 0; ///< bookings the target took in the forecast window
    Money expected_revenue = 0;
    Money actual_revenue = 0;
    std::optional<double> percent_change; ///< absent when the target earned nothing
    /// Per rate WAPE of the fitted curve against the target's choice-set counts.
    std::vector<std::optional<double>> rate_wape;
    /// Why no fit was made, when none was.
    std::optional<std::string> skipped;
};

struct GroupStats {
    std::string key; ///< "Mon".."Sun" or "Overall"
    std::size_t count = 0;
    std::optional<double> mean;
    std::optional<double> sd; ///< sample standard deviation, needs two rows
};

struct BacktestReport {
    std::vector<Money> rates;
    std::vector<TargetResult> targets;
    std::vector<GroupStats> by_weekday; ///< Monday first, then Overall
    /// Number of input scenarios checked against their target date.
    std::size_t hygiene_checks = 0;
};

/// Per rate: days in [first, last] on which some scenario shows the rate on
/// sale, from its open-cell mask or, without a mask, from a booking at it.
/// Rates with fewer than 3 such days are left out of fits.
std::vector<std::size_t> evidence_days(std::span<const DemandScenario> raw, int first, int last);

/// Mean and SD of percent change per weekday plus overall, from the rows.
std::vector<GroupStats> aggregate_by_weekday(const std::vector<TargetResult>& rows);

/// The candidate history of a target: stored dates strictly before it,
/// on the same weekday when configured.
std::vector<Date> history_for(const ScenarioSource& source, Date target, const BacktestConfig& config);

TargetResult backtest_target(const ScenarioSource& source, Date target, const BacktestConfig& config,
                             std::size_t* hygiene_checks = nullptr);

BacktestReport run_backtest(const ScenarioSource& source, const std::vector<Date>& targets,
                            const BacktestConfig& config);

/// Weekday summary table: key, n, mean, sd.
std::string weekday_table_csv(const BacktestReport& report);
/// One row per target with per-rate WAPE in percent; "-" for rates left out.
std::string rate_wape_csv(const BacktestReport& report);

/// History for a synthetic property. Guests follow the reference simulation
/// curves over the forecast window and a flat background demand before it;
/// each day one rate is open, drawn from `open_weights`.
struct SyntheticSpec {
    Date first_checkin{};
    int days = 140;
    int horizon = 100;
    int forecast = 28;
    std::vector<Money> prices{100, 200, 300, 400};
    /// Chance of each rate being open; a zero weight keeps a rate off sale.
    std::vector<double> open_weights{1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0};
    double background = 0.1; ///< per-class daily demand during the warm-up
    double level_spread = 0.25; ///< per-date demand level drawn from 1 ± spread
    std::uint64_t seed = 7;
};

MemorySource generate_synthetic_history(const SyntheticSpec& spec);

} // namespace hrm::pipeline
