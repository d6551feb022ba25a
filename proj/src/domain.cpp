#include "hrm/domain.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace hrm {

namespace {

int parse_int(std::string_view s, std::string_view whole) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw DomainError("invalid date: '" + std::string(whole) + "'");
    }
    return v;
}

} // namespace

Date parse_date(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        throw DomainError("invalid date: '" + std::string(iso) + "'");
    }
    using namespace std::chrono;
    const year_month_day ymd{year{parse_int(iso.substr(0, 4), iso)},
                             month{static_cast<unsigned>(parse_int(iso.substr(5, 2), iso))},
                             day{static_cast<unsigned>(parse_int(iso.substr(8, 2), iso))}};
    if (!ymd.ok()) {
        throw DomainError("invalid date: '" + std::string(iso) + "'");
    }
    return sys_days{ymd};
}

std::string format_date(Date d) {
    using namespace std::chrono;
    const year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

RateLadder::RateLadder(Money min, Money max, Money step) : step_(step) {
    if (!(step > 0) || !(max >= min) || !std::isfinite(min) || !std::isfinite(max)) {
        throw DomainError("rate ladder needs step > 0 and min <= max");
    }
    const double span = (max - min) / step;
    const auto rungs = static_cast<long>(std::llround(span));
    if (std::abs(span - static_cast<double>(rungs)) > 1e-9 * std::max(1.0, span)) {
        throw DomainError("rate ladder range is not a multiple of the step");
    }
    rates_.reserve(static_cast<std::size_t>(rungs) + 1);
    for (long i = 0; i <= rungs; ++i) {
        rates_.push_back(min + static_cast<double>(i) * step);
    }
}

RateLadder::Binned RateLadder::bin(Money rate) const {
    if (rate < min()) {
        return {0, true};
    }
    if (rate > max()) {
        return {size() - 1, true};
    }
    // small epsilon so that exact rungs stored with rounding noise are not pushed down
    const auto idx = static_cast<std::size_t>(std::floor((rate - min()) / step_ + 1e-9));
    return {std::min(idx, size() - 1), false};
}

BookingHorizon::BookingHorizon(int t) : length(t) {
    if (t < 3) {
        throw DomainError("booking horizon needs at least 3 days");
    }
}

int to_booking_horizon(int lead_time, int horizon_length) {
    if (lead_time < 0) {
        throw DomainError("negative lead time: " + std::to_string(lead_time));
    }
    if (lead_time > horizon_length) {
        throw DomainError("lead time " + std::to_string(lead_time) + " exceeds horizon " +
                          std::to_string(horizon_length));
    }
    return horizon_length - lead_time;
}

DemandScenario::DemandScenario(Date date, std::size_t rate_classes, int horizon)
    : checkin(date),
      counts(rate_classes, std::vector<int>(static_cast<std::size_t>(horizon), 0)),
      revenue(static_cast<std::size_t>(horizon), 0.0) {}

bool DemandScenario::is_observed(std::size_t rate, int t) const {
    return observed.empty() || observed[rate][static_cast<std::size_t>(t - 1)];
}

int DemandScenario::day_total(int t) const {
    int sum = 0;
    for (std::size_t r = 0; r < rate_count(); ++r) {
        sum += at(r, t);
    }
    return sum;
}

long DemandScenario::total() const {
    long sum = 0;
    for (const auto& row : counts) {
        for (int c : row) {
            sum += c;
        }
    }
    return sum;
}

std::vector<ChoiceSet> choice_sets(const RateLadder& ladder) {
    std::vector<ChoiceSet> sets;
    sets.reserve(ladder.size());
    for (std::size_t r = 0; r < ladder.size(); ++r) {
        ChoiceSet cs{r, {}};
        cs.members.assign(ladder.rates().begin() + static_cast<std::ptrdiff_t>(r), ladder.rates().end());
        sets.push_back(std::move(cs));
    }
    return sets;
}

DemandScenario cumulate_choice_sets(const DemandScenario& raw) {
    if (raw.cumulated) {
        throw DomainError("scenario for " + format_date(raw.checkin) + " is already cumulated");
    }
    DemandScenario out = raw;
    out.cumulated = true;
    const std::size_t rates = raw.rate_count();
    if (rates < 2) {
        return out;
    }
    for (int t = 1; t <= raw.horizon(); ++t) {
        for (std::size_t r = rates - 1; r-- > 0;) {
            out.at(r, t) = raw.at(r, t) + out.at(r + 1, t);
        }
    }
    return out;
}

} // namespace hrm
