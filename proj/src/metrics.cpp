#include "hrm/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace hrm::metrics {

WapeResult wape(std::span<const double> actuals, std::span<const double> forecasts) {
    if (actuals.size() != forecasts.size()) {
        throw MetricError("WAPE needs equal-length series, got " + std::to_string(actuals.size()) + " and " +
                          std::to_string(forecasts.size()));
    }
    WapeResult r;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        r.numerator += std::abs(actuals[i] - forecasts[i]);
        r.denominator += actuals[i];
    }
    if (!(r.denominator > 0)) {
        throw MetricError("WAPE is undefined when actuals sum to zero");
    }
    r.value = r.numerator / r.denominator;
    return r;
}

double revenue_percent_change(Money actual, Money optimal_expected) {
    if (!(actual > 0)) {
        throw MetricError("actual revenue must be positive");
    }
    return 100.0 * (optimal_expected - actual) / actual;
}

Selection select_input_dates(std::span<const double> target, std::span<const Candidate> candidates, std::size_t k) {
    double target_sum = 0;
    for (double v : target) {
        target_sum += v;
    }
    std::vector<RankedCandidate> ranked;
    ranked.reserve(candidates.size());
    for (const auto& c : candidates) {
        if (c.series.size() != target.size()) {
            throw MetricError("candidate " + format_date(c.date) + " has a series of different length");
        }
        double score = 0;
        if (target_sum > 0) {
            score = wape(target, c.series).value;
        } else {
            for (std::size_t i = 0; i < target.size(); ++i) {
                score += std::abs(target[i] - c.series[i]);
            }
        }
        ranked.push_back({c.date, score});
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        if (a.wape != b.wape) {
            return a.wape < b.wape;
        }
        return a.date < b.date;
    });
    Selection sel;
    sel.short_of_k = ranked.size() < k;
    ranked.resize(std::min(k, ranked.size()));
    sel.chosen = std::move(ranked);
    return sel;
}

std::vector<double> revenue_series(const DemandScenario& s, int first, int last) {
    if (first < 1 || last > s.horizon() || last < first) {
        throw MetricError("revenue window outside the horizon");
    }
    if (s.revenue.size() != static_cast<std::size_t>(s.horizon())) {
        throw MetricError("scenario for " + format_date(s.checkin) + " carries no revenue series");
    }
    return {s.revenue.begin() + (first - 1), s.revenue.begin() + last};
}

} // namespace hrm::metrics
