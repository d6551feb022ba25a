#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrm/domain.hpp"

namespace hrm::metrics {

class MetricError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct WapeResult {
    double value = 0;
    double numerator = 0;   ///< Σ|a - f|
    double denominator = 0; ///< Σa
};

/// Weighted absolute percentage error Σ|a - f| / Σa (a fraction, not percent).
WapeResult wape(std::span<const double> actuals, std::span<const double> forecasts);

/// 100 · (optimal - actual) / actual.
double revenue_percent_change(Money actual, Money optimal_expected);

struct Candidate {
    Date date;
    std::vector<double> series;
};

struct RankedCandidate {
    Date date;
    double wape;
};

struct Selection {
    std::vector<RankedCandidate> chosen;
    /// Set when fewer than k candidates were available.
    bool short_of_k = false;
};

/// The k candidates whose series are closest to `target` in WAPE (target as
/// actuals), ties broken by the earlier date. Candidates with a zero-sum
/// target are ranked by absolute error instead.
Selection select_input_dates(std::span<const double> target, std::span<const Candidate> candidates, std::size_t k);

/// Per-day booked revenue over horizon days [first, last].
std::vector<double> revenue_series(const DemandScenario& s, int first, int last);

} // namespace hrm::metrics
