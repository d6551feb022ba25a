#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrm/domain.hpp"

namespace hrm::ingestion {

/// A required column is absent from a CSV header.
class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(const std::string& column);
    std::string column;
};

/// Joined night rates disagree with a reservation's length of stay.
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Status { stay, cancellation, no_show };

std::string to_string(Status s);
Status parse_status(std::string_view text);

struct Reservation {
    std::string id;
    Date arrival{};
    Date departure{};
    Date booking{};
    Status status = Status::stay;
    Money rate_total = 0;
    bool group = false;
    std::string source;
    std::string sub_source;
    std::string market_code;
    int length_of_stay = 0;
    /// Night rates from the rates table, ordered by stay date.
    std::vector<Money> nightly;
};

struct StayNight {
    Date stay_date{};
    Money night_rate = 0;
    Date booking_date{};
    Status status = Status::stay;
    std::string reservation_id;
};

struct RowError {
    std::string file;
    std::size_t row; ///< 1-based data row, header excluded
    std::string message;
};

struct CleanResult {
    std::vector<Reservation> reservations;
    std::vector<std::string> dropped_zero_rate; ///< complimentary stays
    std::vector<RowError> errors;
};

/// Reservations CSV columns: reservation_id, arrival_date, departure_date,
/// length_of_stay, booking_date, status, rate, group, source, sub_source,
/// market_code. Rates CSV columns: reservation_id, stay_date, rate.
CleanResult parse_and_clean(std::istream& reservations, std::istream& rates);

/// One StayNight per night in [arrival, departure), priced from the joined
/// rates table. Nights priced at zero are not demand and are left out.
std::vector<StayNight> explode_stay_nights(const std::vector<Reservation>& reservations);

enum class Grouping { month, day_of_week, year };

struct KpiReport {
    std::string key;
    std::optional<Money> adr; ///< absent when no room was occupied
    Money revpar = 0;
    double occupancy = 0;
    long occupied = 0;
    Money revenue = 0;
    long available = 0; ///< room nights at full capacity
};

/// KPIs of stayed nights over [first, last], one report per group key present in the period.
std::vector<KpiReport> compute_kpis(const std::vector<StayNight>& nights, int capacity, Grouping grouping, Date first,
                                    Date last);

/// Rate settings and size of one property.
struct PropertyConfig {
    std::string name;
    int capacity = 0;
    RateLadder ladder;
    int horizon = 100;

    void validate() const;
};

/// Rate settings of the four studied properties ("hotel1".."hotel4").
RateLadder reference_ladder(const std::string& property);

struct ScenarioFilter {
    Date first{};
    Date last{};
    std::optional<std::chrono::weekday> weekday;
};

struct ScenarioBuild {
    std::vector<DemandScenario> scenarios;
    std::size_t clamped_rates = 0;    ///< night rates outside the ladder, clamped to its ends
    std::size_t early_bookings = 0;   ///< lead time beyond the horizon, put on day 1
    std::size_t booked_after_stay = 0; ///< booking date after the stay date, skipped
};

/// Raw (not cumulated) scenarios, one per check-in date passing the filter.
/// Every booking counts, whatever its final status.
ScenarioBuild build_demand_scenarios(const std::vector<StayNight>& nights, const PropertyConfig& property,
                                     const ScenarioFilter& filter);

} // namespace hrm::ingestion
