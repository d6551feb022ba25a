#include "hrm/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <unordered_map>

namespace hrm::ingestion {

SchemaError::SchemaError(const std::string& col) : std::runtime_error("missing column: " + col), column(col) {}

std::string to_string(Status s) {
    switch (s) {
    case Status::stay:
        return "stay";
    case Status::cancellation:
        return "cancellation";
    case Status::no_show:
        return "no_show";
    }
    return "unknown";
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

/// Reads one CSV record (RFC 4180 quoting); false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool quoted = false;
    bool any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            field += c;
        }
    }
    if (!any) {
        return false;
    }
    fields.push_back(std::move(field));
    return true;
}

bool blank(const std::vector<std::string>& fields) {
    return fields.size() == 1 && trim(fields[0]).empty();
}

class Header {
public:
    Header(std::istream& in, std::vector<std::string> required) {
        std::vector<std::string> fields;
        if (!read_record(in, fields)) {
            fields.clear();
        }
        for (std::size_t i = 0; i < fields.size(); ++i) {
            std::string name = lower(trim(fields[i]));
            // drop a UTF-8 byte order mark on the first column
            if (i == 0 && name.rfind("\xef\xbb\xbf", 0) == 0) {
                name.erase(0, 3);
            }
            index_[name] = i;
        }
        for (const auto& col : required) {
            if (!index_.contains(col)) {
                throw SchemaError(col);
            }
        }
    }
    std::string_view get(const std::vector<std::string>& row, const std::string& col) const {
        const std::size_t i = index_.at(col);
        if (i >= row.size()) {
            throw std::runtime_error("row has no value for column " + col);
        }
        return trim(row[i]);
    }

private:
    std::unordered_map<std::string, std::size_t> index_;
};

double parse_money(std::string_view s, const char* what) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw std::runtime_error(std::string("invalid ") + what + ": '" + std::string(s) + "'");
    }
    return v;
}

int parse_count(std::string_view s, const char* what) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::runtime_error(std::string("invalid ") + what + ": '" + std::string(s) + "'");
    }
    return v;
}

bool parse_bool(std::string_view s) {
    const auto v = lower(s);
    if (v == "true" || v == "1" || v == "yes" || v == "y") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no" || v == "n" || v.empty()) {
        return false;
    }
    throw std::runtime_error("invalid group flag: '" + std::string(s) + "'");
}

} // namespace

Status parse_status(std::string_view text) {
    const auto v = lower(trim(text));
    if (v == "stay" || v == "checked-out" || v == "checked_out") {
        return Status::stay;
    }
    if (v == "cancellation" || v == "cancelled" || v == "canceled") {
        return Status::cancellation;
    }
    if (v == "no_show" || v == "no-show" || v == "noshow") {
        return Status::no_show;
    }
    throw std::runtime_error("invalid status: '" + std::string(text) + "'");
}

CleanResult parse_and_clean(std::istream& reservations, std::istream& rates) {
    CleanResult out;

    const Header rate_header(rates, {"reservation_id", "stay_date", "rate"});
    std::unordered_map<std::string, std::vector<std::pair<Date, Money>>> nightly;
    std::vector<std::string> fields;
    std::size_t row = 0;
    while (read_record(rates, fields)) {
        ++row;
        if (blank(fields)) {
            continue;
        }
        try {
            const std::string id(rate_header.get(fields, "reservation_id"));
            const Date d = parse_date(rate_header.get(fields, "stay_date"));
            const Money r = parse_money(rate_header.get(fields, "rate"), "rate");
            if (r < 0) {
                throw std::runtime_error("negative night rate");
            }
            nightly[id].emplace_back(d, r);
        } catch (const std::exception& e) {
            out.errors.push_back({"rates", row, e.what()});
        }
    }

    const Header res_header(reservations, {"reservation_id", "arrival_date", "departure_date", "length_of_stay",
                                           "booking_date", "status", "rate", "group", "source", "sub_source",
                                           "market_code"});
    row = 0;
    while (read_record(reservations, fields)) {
        ++row;
        if (blank(fields)) {
            continue;
        }
        try {
            Reservation r;
            r.id = std::string(res_header.get(fields, "reservation_id"));
            r.arrival = parse_date(res_header.get(fields, "arrival_date"));
            r.departure = parse_date(res_header.get(fields, "departure_date"));
            r.booking = parse_date(res_header.get(fields, "booking_date"));
            r.length_of_stay = parse_count(res_header.get(fields, "length_of_stay"), "length of stay");
            r.status = parse_status(res_header.get(fields, "status"));
            r.rate_total = parse_money(res_header.get(fields, "rate"), "rate");
            r.group = parse_bool(res_header.get(fields, "group"));
            r.source = std::string(res_header.get(fields, "source"));
            r.sub_source = std::string(res_header.get(fields, "sub_source"));
            r.market_code = std::string(res_header.get(fields, "market_code"));
            if (r.departure <= r.arrival) {
                throw std::runtime_error("departure is not after arrival");
            }
            if (r.length_of_stay != (r.departure - r.arrival).count()) {
                throw std::runtime_error("length of stay disagrees with arrival and departure");
            }
            if (r.rate_total < 0) {
                throw std::runtime_error("negative rate");
            }
            if (r.rate_total == 0) {
                out.dropped_zero_rate.push_back(r.id);
                continue;
            }
            if (auto it = nightly.find(r.id); it != nightly.end()) {
                auto nights = it->second;
                std::sort(nights.begin(), nights.end());
                for (const auto& [d, rate] : nights) {
                    r.nightly.push_back(rate);
                }
            }
            out.reservations.push_back(std::move(r));
        } catch (const std::exception& e) {
            out.errors.push_back({"reservations", row, e.what()});
        }
    }
    return out;
}

std::vector<StayNight> explode_stay_nights(const std::vector<Reservation>& reservations) {
    std::vector<StayNight> nights;
    for (const auto& r : reservations) {
        if (r.nightly.size() != static_cast<std::size_t>(r.length_of_stay)) {
            throw IntegrityError("reservation " + r.id + " has " + std::to_string(r.nightly.size()) +
                                 " night rates for a stay of " + std::to_string(r.length_of_stay) + " nights");
        }
        for (int i = 0; i < r.length_of_stay; ++i) {
            const Money rate = r.nightly[static_cast<std::size_t>(i)];
            if (rate <= 0) {
                continue;
            }
            nights.push_back({r.arrival + std::chrono::days{i}, rate, r.booking, r.status, r.id});
        }
    }
    return nights;
}

namespace {

std::string group_key(Date d, Grouping g) {
    using namespace std::chrono;
    static const char* const names[] = {"Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};
    const year_month_day ymd{d};
    switch (g) {
    case Grouping::month: {
        char buf[4];
        std::snprintf(buf, sizeof buf, "%02u", static_cast<unsigned>(ymd.month()));
        return buf;
    }
    case Grouping::day_of_week:
        return names[weekday{d}.c_encoding()];
    case Grouping::year:
        return std::to_string(static_cast<int>(ymd.year()));
    }
    return {};
}

/// Monday-first ordering for day-of-week keys, lexical otherwise.
int key_rank(const std::string& key, Grouping g) {
    if (g != Grouping::day_of_week) {
        return 0;
    }
    static const char* const order[] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
    for (int i = 0; i < 7; ++i) {
        if (key == order[i]) {
            return i;
        }
    }
    return 7;
}

} // namespace

std::vector<KpiReport> compute_kpis(const std::vector<StayNight>& nights, int capacity, Grouping grouping, Date first,
                                    Date last) {
    if (capacity <= 0) {
        throw DomainError("capacity must be positive");
    }
    if (last < first) {
        throw DomainError("KPI period ends before it starts");
    }
    std::map<std::string, KpiReport> groups;
    for (Date d = first; d <= last; d += std::chrono::days{1}) {
        auto& g = groups[group_key(d, grouping)];
        g.available += capacity;
    }
    for (const auto& n : nights) {
        if (n.status != Status::stay || n.stay_date < first || n.stay_date > last) {
            continue;
        }
        auto& g = groups[group_key(n.stay_date, grouping)];
        g.occupied += 1;
        g.revenue += n.night_rate;
    }
    std::vector<KpiReport> out;
    for (auto& [key, g] : groups) {
        g.key = key;
        if (g.occupied > 0) {
            g.adr = g.revenue / static_cast<double>(g.occupied);
        }
        g.revpar = g.revenue / static_cast<double>(g.available);
        g.occupancy = static_cast<double>(g.occupied) / static_cast<double>(g.available);
        out.push_back(g);
    }
    std::stable_sort(out.begin(), out.end(), [grouping](const KpiReport& a, const KpiReport& b) {
        return key_rank(a.key, grouping) < key_rank(b.key, grouping);
    });
    return out;
}

void PropertyConfig::validate() const {
    if (capacity <= 0) {
        throw DomainError("property capacity must be positive");
    }
    if (ladder.size() == 0) {
        throw DomainError("property has no rate ladder");
    }
    BookingHorizon{horizon};
}

RateLadder reference_ladder(const std::string& property) {
    if (property == "hotel1") {
        return {70, 170, 10};
    }
    if (property == "hotel2") {
        return {90, 240, 15};
    }
    if (property == "hotel3") {
        return {100, 250, 15};
    }
    if (property == "hotel4") {
        return {150, 450, 20};
    }
    throw DomainError("unknown reference property: " + property);
}

ScenarioBuild build_demand_scenarios(const std::vector<StayNight>& nights, const PropertyConfig& property,
                                     const ScenarioFilter& filter) {
    property.validate();
    const int T = property.horizon;
    ScenarioBuild out;
    std::map<Date, std::size_t> slot;
    for (Date d = filter.first; d <= filter.last; d += std::chrono::days{1}) {
        if (filter.weekday && std::chrono::weekday{d} != *filter.weekday) {
            continue;
        }
        slot[d] = out.scenarios.size();
        out.scenarios.emplace_back(d, property.ladder.size(), T);
    }
    for (const auto& n : nights) {
        const auto it = slot.find(n.stay_date);
        if (it == slot.end()) {
            continue;
        }
        const int lead = static_cast<int>((n.stay_date - n.booking_date).count());
        if (lead < 0) {
            ++out.booked_after_stay;
            continue;
        }
        int t = 1;
        if (lead >= T) {
            ++out.early_bookings;
        } else {
            t = to_booking_horizon(lead, T);
        }
        const auto bin = property.ladder.bin(n.night_rate);
        if (bin.clamped) {
            ++out.clamped_rates;
        }
        auto& sc = out.scenarios[it->second];
        sc.at(bin.index, t) += 1;
        sc.revenue[static_cast<std::size_t>(t - 1)] += n.night_rate;
    }
    return out;
}

} // namespace hrm::ingestion
