#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "hrm/domain.hpp"
#include "hrm/spline.hpp"

namespace hrm::dp {

class DpError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Per-interval booking probabilities, prices descending (index 0 = highest).
struct ArrivalRates {
    std::vector<Money> prices;
    /// [price index][interval] → probability of one booking in that interval
    std::vector<std::vector<double>> lambda;
    int subdivisions = 1;
    /// Horizon day each interval belongs to.
    std::vector<int> day_of_interval;

    std::size_t interval_count() const { return day_of_interval.size(); }
    std::size_t price_count() const { return prices.size(); }
};

/// Daily demand rate of ascending-price class `rate` on horizon day `day`.
using DailyDemand = std::function<double(std::size_t rate, int day)>;

/// Splits each day into `subdivisions` intervals (doubling until every
/// interval probability is below one). `ascending_prices[r]` is the price of
/// class r of `demand`.
ArrivalRates refine_time_grid(const DailyDemand& demand, const std::vector<Money>& ascending_prices,
                              int first_day, int last_day, int subdivisions = 8);

/// Fitted curves evaluated at each integer knot day; unfitted classes get zero demand.
ArrivalRates refine_time_grid(const spline::RateCurveSet& curves, int subdivisions = 8);

/// V[t][x] for t = 0..N (row N is the no-time-left boundary), x = 0..X.
struct ValueTable {
    std::vector<std::vector<double>> v;

    double operator()(std::size_t t, std::size_t x) const { return v[t][x]; }
    std::size_t intervals() const { return v.size() - 1; }
    std::size_t capacity() const { return v.front().size() - 1; }
};

/// Price index posted at (interval, remaining capacity); -1 where no decision exists.
struct RatePolicy {
    std::vector<std::vector<int>> choice;
    /// Ties resolve to the highest price.
    static constexpr const char* tie_rule = "highest-price";

    int operator()(std::size_t t, std::size_t x) const { return choice[t][x]; }
};

struct DpSolution {
    ValueTable values;
    RatePolicy policy;
    double expected_revenue = 0; ///< V at the first interval with full capacity
};

DpSolution solve_dp(const ArrivalRates& rates, int capacity);

/// Expected revenue of a fixed rule choosing a price index per (interval, capacity).
double evaluate_policy(const ArrivalRates& rates, int capacity,
                       const std::function<int(std::size_t interval, int remaining)>& choose);

/// At most one arrival per interval, carrying the guest's willingness to pay.
using ArrivalSequence = std::vector<std::optional<Money>>;

/// Draws arrivals so that P(willingness >= price_j) = lambda(j, t) in every interval.
/// Requires lambda nonincreasing in price.
ArrivalSequence sample_arrivals(const ArrivalRates& rates, std::mt19937_64& rng);

/// Replays arrivals against the policy: a guest books when willing to pay
/// the posted rate and a room is left.
Money policy_revenue_on_scenario(const RatePolicy& policy, const ArrivalSequence& arrivals,
                                 const std::vector<Money>& prices, int capacity);

} // namespace hrm::dp
