#pragma once

#include <chrono>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hrm {

/// Money per room night, in currency units.
using Money = double;
using Date = std::chrono::sys_days;

Date parse_date(std::string_view iso);
std::string format_date(Date d);

/// Thrown when a domain invariant is violated by caller input.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evenly spaced, strictly increasing ladder of sellable night rates.
///
/// Stored ascending: index 0 is the cheapest rate. The pricing recursion
/// works on descending prices and reindexes on its own.
class RateLadder {
public:
    RateLadder() = default;
    RateLadder(Money min, Money max, Money step);

    std::size_t size() const { return rates_.size(); }
    Money min() const { return rates_.front(); }
    Money max() const { return rates_.back(); }
    Money step() const { return step_; }
    Money operator[](std::size_t i) const { return rates_[i]; }
    const std::vector<Money>& rates() const { return rates_; }

    struct Binned {
        std::size_t index;
        bool clamped;
    };
    /// Rounds down to the nearest rung; rates outside [min, max] are clamped.
    Binned bin(Money rate) const;

private:
    std::vector<Money> rates_;
    Money step_ = 0;
};

/// Days from the first bookable day (t = 1) to check-in (t = length).
struct BookingHorizon {
    int length;

    explicit BookingHorizon(int t);
};

/// Maps a lead time in days onto the horizon index t = T - lead_time.
int to_booking_horizon(int lead_time, int horizon_length);

/// Per check-in date booking counts indexed [rate class][horizon day].
///
/// Day t (1-based) lives at column t - 1. `observed` marks cells where the
/// rate class was open for sale; an empty mask means every cell is observed.
/// `revenue` holds the booked revenue per horizon day when known.
struct DemandScenario {
    Date checkin{};
    std::vector<std::vector<int>> counts;
    std::vector<std::vector<bool>> observed;
    std::vector<Money> revenue;
    bool cumulated = false;

    DemandScenario() = default;
    DemandScenario(Date date, std::size_t rate_classes, int horizon);

    std::size_t rate_count() const { return counts.size(); }
    int horizon() const { return counts.empty() ? 0 : static_cast<int>(counts.front().size()); }

    int& at(std::size_t rate, int t) { return counts[rate][static_cast<std::size_t>(t - 1)]; }
    int at(std::size_t rate, int t) const { return counts[rate][static_cast<std::size_t>(t - 1)]; }
    bool is_observed(std::size_t rate, int t) const;

    /// Total bookings over all rate classes on day t.
    int day_total(int t) const;
    long total() const;
};

/// The set of rates a guest with a given reservation price accepts.
struct ChoiceSet {
    std::size_t rate_class;
    std::vector<Money> members;
};

/// Nested choice sets, one per ladder rung, cheapest first.
std::vector<ChoiceSet> choice_sets(const RateLadder& ladder);

/// Demand at rate r becomes the sum of raw bookings at rates >= r.
DemandScenario cumulate_choice_sets(const DemandScenario& raw);

} // namespace hrm
