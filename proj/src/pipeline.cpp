#include "hrm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "hrm/dp.hpp"
#include "hrm/parallel.hpp"
#include "hrm/sim.hpp"

namespace hrm::pipeline {

void BacktestConfig::validate() const {
    if (warmup < 1 || warmup >= horizon) {
        throw DomainError("warm-up must leave at least one forecast day inside the horizon");
    }
    if (forecast() < 3) {
        throw DomainError("forecast window needs at least 3 days");
    }
    if (k < 1) {
        throw DomainError("k must be at least 1");
    }
    if (!(g_low >= 0 && g_low <= g_high && g_high <= 1)) {
        throw DomainError("smoothing anchors must satisfy 0 <= g_low <= g_high <= 1");
    }
    if (subdivisions < 1) {
        throw DomainError("subdivisions must be at least 1");
    }
}

std::vector<double> interpolate_smoothing(const RateLadder& ladder, double g_low, double g_high) {
    if (!(g_low >= 0 && g_low <= 1 && g_high >= 0 && g_high <= 1)) {
        throw DomainError("smoothing anchors must lie in [0, 1]");
    }
    const std::size_t R = ladder.size();
    if (R == 0) {
        throw DomainError("empty rate ladder");
    }
    if (R == 1) {
        return {g_low};
    }
    std::vector<double> g(R);
    for (std::size_t r = 0; r < R; ++r) {
        g[r] = g_low + (g_high - g_low) * static_cast<double>(r) / static_cast<double>(R - 1);
    }
    return g;
}

MemorySource::MemorySource(RateLadder ladder, int horizon, std::vector<DemandScenario> scenarios)
    : ladder_(std::move(ladder)), horizon_(horizon), scenarios_(std::move(scenarios)) {
    std::sort(scenarios_.begin(), scenarios_.end(),
              [](const DemandScenario& a, const DemandScenario& b) { return a.checkin < b.checkin; });
    for (std::size_t i = 0; i < scenarios_.size(); ++i) {
        const auto& s = scenarios_[i];
        if (s.rate_count() != ladder_.size() || s.horizon() != horizon_) {
            throw DomainError("scenario " + format_date(s.checkin) + " does not match the ladder and horizon");
        }
        if (i > 0 && scenarios_[i - 1].checkin == s.checkin) {
            throw DomainError("duplicate scenario for " + format_date(s.checkin));
        }
    }
}

std::vector<Date> MemorySource::dates() const {
    std::vector<Date> out;
    out.reserve(scenarios_.size());
    for (const auto& s : scenarios_) {
        out.push_back(s.checkin);
    }
    return out;
}

DemandScenario MemorySource::load(Date checkin) const {
    const auto it = std::lower_bound(scenarios_.begin(), scenarios_.end(), checkin,
                                     [](const DemandScenario& s, Date d) { return s.checkin < d; });
    if (it == scenarios_.end() || it->checkin != checkin) {
        throw std::out_of_range("no scenario for " + format_date(checkin));
    }
    return *it;
}

namespace {

const char* const weekday_names[] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};

const char* weekday_name(Date d) {
    return weekday_names[std::chrono::weekday{d}.iso_encoding() - 1];
}

GroupStats stats_of(std::string key, const std::vector<double>& v) {
    GroupStats g;
    g.key = std::move(key);
    g.count = v.size();
    if (v.empty()) {
        return g;
    }
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    g.mean = mean;
    if (v.size() >= 2) {
        double ss = 0;
        for (double x : v) {
            ss += (x - mean) * (x - mean);
        }
        g.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return g;
}

bool sold_or_open(const DemandScenario& raw, std::size_t r, int t) {
    return raw.observed.empty() ? raw.at(r, t) > 0 : raw.is_observed(r, t);
}

} // namespace

std::vector<std::size_t> evidence_days(std::span<const DemandScenario> raw, int first, int last) {
    if (raw.empty()) {
        return {};
    }
    const std::size_t R = raw.front().rate_count();
    std::vector<std::size_t> days(R, 0);
    for (std::size_t r = 0; r < R; ++r) {
        for (int t = first; t <= last; ++t) {
            const bool seen = std::any_of(raw.begin(), raw.end(), [&](const auto& s) { return sold_or_open(s, r, t); });
            days[r] += seen ? 1 : 0;
        }
    }
    return days;
}

std::vector<GroupStats> aggregate_by_weekday(const std::vector<TargetResult>& rows) {
    std::vector<std::vector<double>> per_day(7);
    std::vector<double> all;
    for (const auto& row : rows) {
        if (!row.percent_change) {
            continue;
        }
        per_day[std::chrono::weekday{row.target}.iso_encoding() - 1].push_back(*row.percent_change);
        all.push_back(*row.percent_change);
    }
    std::vector<GroupStats> out;
    for (std::size_t d = 0; d < 7; ++d) {
        out.push_back(stats_of(weekday_names[d], per_day[d]));
    }
    out.push_back(stats_of("Overall", all));
    return out;
}

std::vector<Date> history_for(const ScenarioSource& source, Date target, const BacktestConfig& config) {
    std::vector<Date> out;
    for (Date d : source.dates()) {
        if (d >= target) {
            continue;
        }
        if (config.same_weekday && std::chrono::weekday{d} != std::chrono::weekday{target}) {
            continue;
        }
        out.push_back(d);
    }
    return out;
}

TargetResult backtest_target(const ScenarioSource& source, Date target, const BacktestConfig& config,
                             std::size_t* hygiene_checks) {
    config.validate();
    if (source.horizon() != config.horizon) {
        throw DomainError("store horizon " + std::to_string(source.horizon()) + " differs from the configured " +
                          std::to_string(config.horizon));
    }
    const RateLadder& ladder = source.ladder();
    const std::size_t R = ladder.size();
    const int first = config.warmup + 1;
    const int last = config.horizon;

    TargetResult row;
    row.target = target;
    row.smoothing = interpolate_smoothing(ladder, config.g_low, config.g_high);
    row.observed_days.assign(R, 0);
    row.excluded.assign(R, true);
    row.rate_wape.assign(R, std::nullopt);

    const DemandScenario actual = source.load(target);
    for (int t = first; t <= last; ++t) {
        row.capacity += actual.day_total(t);
        row.actual_revenue += actual.revenue[static_cast<std::size_t>(t - 1)];
    }

    std::vector<metrics::Candidate> candidates;
    for (Date d : history_for(source, target, config)) {
        candidates.push_back({d, metrics::revenue_series(source.load(d), 1, config.warmup)});
    }
    const auto target_series = metrics::revenue_series(actual, 1, config.warmup);
    const auto selection = metrics::select_input_dates(target_series, candidates, config.k);
    row.selected = selection.chosen;
    row.short_of_k = selection.short_of_k;

    std::vector<DemandScenario> raw;
    std::vector<DemandScenario> inputs;
    for (const auto& c : row.selected) {
        DemandScenario s = source.load(c.date);
        // no input may be dated on or after the day being forecast
        if (s.checkin >= target) {
            throw TemporalLeak("scenario " + format_date(s.checkin) + " entered the fit for " + format_date(target));
        }
        if (hygiene_checks) {
            ++*hygiene_checks;
        }
        inputs.push_back(cumulate_choice_sets(s));
        raw.push_back(std::move(s));
    }

    if (!raw.empty()) {
        row.observed_days = evidence_days(raw, first, last);
    }
    for (std::size_t r = 0; r < R; ++r) {
        row.excluded[r] = row.observed_days[r] < 3;
    }

    if (inputs.empty()) {
        row.skipped = "no history before the target date";
    } else if (std::all_of(row.excluded.begin(), row.excluded.end(), [](bool e) { return e; })) {
        row.skipped = "no rate has 3 observed days in the forecast window";
    }

    if (!row.skipped) {
        spline::FitOptions opt;
        opt.smoothing = row.smoothing;
        opt.anscombe = config.anscombe;
        opt.first_day = first;
        opt.last_day = last;
        opt.exclude = row.excluded;
        try {
            auto fit = spline::fit_curves(spline::build_fit_program(inputs, ladder, opt));
            const auto grid = dp::refine_time_grid(fit.curves, config.subdivisions);
            row.expected_revenue = dp::solve_dp(grid, row.capacity).expected_revenue;
            row.diagnostics = std::move(fit.diagnostics);

            const DemandScenario cum = cumulate_choice_sets(actual);
            const double lo = fit.curves.first_knot();
            const double hi = fit.curves.last_knot();
            for (std::size_t r = 0; r < R; ++r) {
                if (!fit.curves.has_curve(r)) {
                    continue;
                }
                std::vector<double> a;
                std::vector<double> f;
                for (int t = first; t <= last; ++t) {
                    if (cum.is_observed(r, t)) {
                        a.push_back(cum.at(r, t));
                        f.push_back(spline::evaluate_curve(fit.curves, r, std::clamp<double>(t, lo, hi)));
                    }
                }
                if (std::accumulate(a.begin(), a.end(), 0.0) > 0) {
                    row.rate_wape[r] = metrics::wape(a, f).value;
                }
            }
        } catch (const spline::FitError& e) {
            row.skipped = e.what();
        }
    }

    if (row.actual_revenue > 0) {
        row.percent_change = metrics::revenue_percent_change(row.actual_revenue, row.expected_revenue);
    }
    return row;
}

BacktestReport run_backtest(const ScenarioSource& source, const std::vector<Date>& targets,
                            const BacktestConfig& config) {
    config.validate();
    BacktestReport report;
    report.rates = source.ladder().rates();
    report.targets.resize(targets.size());
    std::vector<std::size_t> checks(targets.size(), 0);
    parallel_for(
        targets.size(),
        [&](std::size_t i) { report.targets[i] = backtest_target(source, targets[i], config, &checks[i]); },
        config.workers);
    report.hygiene_checks = std::accumulate(checks.begin(), checks.end(), std::size_t{0});
    report.by_weekday = aggregate_by_weekday(report.targets);
    return report;
}

namespace {

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string opt2(const std::optional<double>& v) {
    return v ? fixed2(*v) : "-";
}

} // namespace

std::string weekday_table_csv(const BacktestReport& report) {
    std::ostringstream out;
    out << "day,n,mean_pct,sd_pct\n";
    for (const auto& g : report.by_weekday) {
        out << g.key << ',' << g.count << ',' << opt2(g.mean) << ',' << opt2(g.sd) << '\n';
    }
    return out.str();
}

std::string rate_wape_csv(const BacktestReport& report) {
    std::ostringstream out;
    out << "date,day,capacity,actual_revenue,expected_revenue,percent_change";
    for (Money r : report.rates) {
        char label[64];
        std::snprintf(label, sizeof label, "%g", r);
        out << ",rate_" << label;
    }
    out << '\n';
    for (const auto& row : report.targets) {
        out << format_date(row.target) << ',' << weekday_name(row.target) << ',' << row.capacity << ','
            << fixed2(row.actual_revenue) << ',' << fixed2(row.expected_revenue) << ',' << opt2(row.percent_change);
        for (std::size_t r = 0; r < row.rate_wape.size(); ++r) {
            const auto& w = row.rate_wape[r];
            out << ',' << (row.excluded[r] || !w ? std::string("-") : fixed2(100.0 * *w));
        }
        out << '\n';
    }
    return out.str();
}

MemorySource generate_synthetic_history(const SyntheticSpec& spec) {
    if (spec.forecast != 28) {
        throw DomainError("the reference demand curves span 28 days");
    }
    if (spec.horizon <= spec.forecast || spec.days < 1) {
        throw DomainError("synthetic history needs a warm-up and at least one date");
    }
    if (spec.prices.size() < 3 || spec.open_weights.size() != spec.prices.size()) {
        throw DomainError("synthetic history needs at least 3 prices and one open weight per price");
    }
    const Money step = spec.prices[1] - spec.prices[0];
    RateLadder ladder(spec.prices.front(), spec.prices.back(), step);
    if (ladder.size() != spec.prices.size()) {
        throw DomainError("synthetic prices must be evenly spaced");
    }

    const sim::TrueCurves curves(sim::TrueCurveSpec{});
    const std::size_t R = spec.prices.size();
    const int warmup = spec.horizon - spec.forecast;
    // guests whose willingness to pay is exactly price c
    auto individual = [&](std::size_t c, int t) {
        if (c >= curves.class_count()) {
            return 0.0;
        }
        return t <= warmup ? spec.background : curves.individual(c, t - warmup);
    };

    std::mt19937_64 rng(spec.seed);
    std::discrete_distribution<std::size_t> pick_open(spec.open_weights.begin(), spec.open_weights.end());
    std::uniform_real_distribution<double> level_draw(1.0 - spec.level_spread, 1.0 + spec.level_spread);

    std::vector<DemandScenario> out;
    for (int i = 0; i < spec.days; ++i) {
        DemandScenario s(spec.first_checkin + std::chrono::days{i}, R, spec.horizon);
        s.observed.assign(R, std::vector<bool>(static_cast<std::size_t>(spec.horizon), false));
        const double level = level_draw(rng);
        for (int t = 1; t <= spec.horizon; ++t) {
            const std::size_t open = pick_open(rng);
            double lambda = 0;
            for (std::size_t c = open; c < R; ++c) {
                lambda += individual(c, t);
            }
            lambda *= level;
            const int n = lambda > 0 ? std::poisson_distribution<int>(lambda)(rng) : 0;
            s.observed[open][static_cast<std::size_t>(t - 1)] = true;
            s.at(open, t) = n;
            s.revenue[static_cast<std::size_t>(t - 1)] = n * spec.prices[open];
        }
        out.push_back(std::move(s));
    }
    return MemorySource(std::move(ladder), spec.horizon, std::move(out));
}

} // namespace hrm::pipeline
