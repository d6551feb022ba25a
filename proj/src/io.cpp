#include "hrm/io.hpp"

#include <cmath>

namespace hrm::io {

FieldError::FieldError(std::string f, const std::string& message)
    : std::invalid_argument(f + ": " + message), field(std::move(f)) {}

std::int64_t to_minor(Money m) {
    return std::llround(m * 100.0);
}

Money from_minor(std::int64_t minor) {
    return static_cast<Money>(minor) / 100.0;
}

namespace {

template <class T>
T get(const json& j, const std::string& name) {
    if (!j.is_object() || !j.contains(name)) {
        throw FieldError(name, "missing");
    }
    try {
        return j.at(name).get<T>();
    } catch (const json::exception&) {
        throw FieldError(name, "has the wrong type");
    }
}

template <class T>
T get_or(const json& j, const std::string& name, T fallback) {
    if (!j.is_object() || !j.contains(name) || j.at(name).is_null()) {
        return fallback;
    }
    return get<T>(j, name);
}

Date get_date(const json& j, const std::string& name) {
    const auto text = get<std::string>(j, name);
    try {
        return parse_date(text);
    } catch (const std::exception&) {
        throw FieldError(name, "is not an ISO date: " + text);
    }
}

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

json box(const sim::BoxStats& b) {
    return {{"min", b.min}, {"q1", b.q1}, {"median", b.median}, {"q3", b.q3},
            {"max", b.max}, {"mean", b.mean}, {"count", b.count}};
}

std::vector<std::int64_t> minor_list(const std::vector<Money>& v) {
    std::vector<std::int64_t> out;
    out.reserve(v.size());
    for (Money m : v) {
        out.push_back(to_minor(m));
    }
    return out;
}

} // namespace

json to_json(const DemandScenario& s) {
    json j;
    j["checkin"] = format_date(s.checkin);
    j["cumulated"] = s.cumulated;
    j["counts"] = s.counts;
    if (!s.observed.empty()) {
        j["observed"] = s.observed;
    }
    j["revenue_minor"] = minor_list(s.revenue);
    return j;
}

DemandScenario scenario_from_json(const json& j) {
    DemandScenario s;
    s.checkin = get_date(j, "checkin");
    s.cumulated = get_or<bool>(j, "cumulated", false);
    s.counts = get<std::vector<std::vector<int>>>(j, "counts");
    if (s.counts.empty()) {
        throw FieldError("counts", "has no rate classes");
    }
    const std::size_t T = s.counts.front().size();
    for (const auto& row : s.counts) {
        if (row.size() != T) {
            throw FieldError("counts", "rows differ in length");
        }
        for (int c : row) {
            if (c < 0) {
                throw FieldError("counts", "holds a negative count");
            }
        }
    }
    s.observed = get_or<std::vector<std::vector<bool>>>(j, "observed", {});
    if (!s.observed.empty()) {
        if (s.observed.size() != s.counts.size()) {
            throw FieldError("observed", "does not match counts");
        }
        for (const auto& row : s.observed) {
            if (row.size() != T) {
                throw FieldError("observed", "does not match counts");
            }
        }
    }
    const auto rev = get_or<std::vector<std::int64_t>>(j, "revenue_minor", {});
    s.revenue.assign(T, 0.0);
    if (!rev.empty()) {
        if (rev.size() != T) {
            throw FieldError("revenue_minor", "does not match the horizon");
        }
        for (std::size_t t = 0; t < T; ++t) {
            s.revenue[t] = from_minor(rev[t]);
        }
    }
    return s;
}

json to_json(const RateLadder& l) {
    return {{"min_minor", to_minor(l.min())}, {"max_minor", to_minor(l.max())}, {"step_minor", to_minor(l.step())}};
}

RateLadder ladder_from_json(const json& j) {
    try {
        return RateLadder(from_minor(get<std::int64_t>(j, "min_minor")), from_minor(get<std::int64_t>(j, "max_minor")),
                          from_minor(get<std::int64_t>(j, "step_minor")));
    } catch (const DomainError& e) {
        throw FieldError("ladder", e.what());
    }
}

json to_json(const ingestion::PropertyConfig& p) {
    return {{"name", p.name}, {"capacity", p.capacity}, {"horizon", p.horizon}, {"ladder", to_json(p.ladder)}};
}

ingestion::PropertyConfig property_from_json(const json& j) {
    ingestion::PropertyConfig p;
    p.name = get_or<std::string>(j, "name", "");
    p.capacity = get<int>(j, "capacity");
    p.horizon = get_or<int>(j, "horizon", 100);
    if (j.contains("ladder")) {
        p.ladder = ladder_from_json(j.at("ladder"));
    } else if (j.contains("reference")) {
        try {
            p.ladder = ingestion::reference_ladder(get<std::string>(j, "reference"));
        } catch (const DomainError& e) {
            throw FieldError("reference", e.what());
        }
    } else {
        throw FieldError("ladder", "missing (give a ladder or a reference property)");
    }
    if (p.name.empty()) {
        p.name = get_or<std::string>(j, "reference", "property");
    }
    try {
        p.validate();
    } catch (const DomainError& e) {
        throw FieldError("property", e.what());
    }
    return p;
}

json to_json(const spline::RateCurveSet& c) {
    json curves = json::array();
    for (const auto& curve : c.curves) {
        json pieces = json::array();
        for (const auto& p : curve.pieces) {
            pieces.push_back({{"x0", p.x0}, {"x1", p.x1}, {"a", p.a}, {"b", p.b}, {"c", p.c}, {"d", p.d}});
        }
        curves.push_back({{"smoothing", curve.smoothing}, {"excluded", curve.excluded}, {"pieces", pieces}});
    }
    return {{"knots", c.knots}, {"rates_minor", minor_list(c.rates)}, {"anscombe", c.anscombe}, {"curves", curves}};
}

spline::RateCurveSet curves_from_json(const json& j) {
    spline::RateCurveSet c;
    c.knots = get<std::vector<double>>(j, "knots");
    for (auto m : get<std::vector<std::int64_t>>(j, "rates_minor")) {
        c.rates.push_back(from_minor(m));
    }
    c.anscombe = get_or<bool>(j, "anscombe", false);
    for (const auto& cj : get<json>(j, "curves")) {
        spline::RateCurve curve;
        curve.smoothing = get<double>(cj, "smoothing");
        curve.excluded = get_or<bool>(cj, "excluded", false);
        for (const auto& pj : get<json>(cj, "pieces")) {
            curve.pieces.push_back({get<double>(pj, "a"), get<double>(pj, "b"), get<double>(pj, "c"),
                                    get<double>(pj, "d"), get<double>(pj, "x0"), get<double>(pj, "x1")});
        }
        if (!curve.excluded && curve.pieces.size() + 1 != c.knots.size()) {
            throw FieldError("curves", "piece count does not match the knots");
        }
        c.curves.push_back(std::move(curve));
    }
    if (c.curves.size() != c.rates.size()) {
        throw FieldError("curves", "one curve per rate is required");
    }
    return c;
}

json to_json(const spline::FitDiagnostics& d) {
    return {{"objective", d.objective},
            {"weighted_error", d.weighted_error},
            {"curvature", d.curvature},
            {"variables", d.variables},
            {"constraints", d.constraints},
            {"iterations", d.iterations},
            {"between_knot_ordering_gap", d.between_knot_ordering_gap}};
}

json to_json(const dp::DpSolution& sol, const dp::ArrivalRates& rates, bool include_values) {
    json posted = json::array();
    for (std::size_t t = 0; t < sol.policy.choice.size() - 1; ++t) {
        json row = json::array();
        for (int j : sol.policy.choice[t]) {
            row.push_back(j < 0 ? json(nullptr) : json(to_minor(rates.prices[static_cast<std::size_t>(j)])));
        }
        posted.push_back(std::move(row));
    }
    json out = {{"expected_revenue_minor", to_minor(sol.expected_revenue)},
                {"capacity", sol.values.capacity()},
                {"intervals", sol.values.intervals()},
                {"subdivisions", rates.subdivisions},
                {"day_of_interval", rates.day_of_interval},
                {"prices_minor", minor_list(rates.prices)},
                {"tie_rule", dp::RatePolicy::tie_rule},
                {"posted_minor", posted}};
    if (include_values) {
        json values = json::array();
        for (const auto& row : sol.values.v) {
            values.push_back(minor_list(row));
        }
        out["values_minor"] = std::move(values);
    }
    return out;
}

sim::SimConfig sim_config_from_json(const json& j) {
    sim::SimConfig c;
    if (!j.is_object()) {
        throw FieldError("config", "must be an object");
    }
    c.scenarios = get_or<std::size_t>(j, "scenarios", c.scenarios);
    c.out_of_sample = get_or<std::size_t>(j, "out_of_sample", c.out_of_sample);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.open_weights = get_or<std::vector<double>>(j, "open_weights", c.open_weights);
    c.smoothing_sets = get_or<std::vector<std::vector<double>>>(j, "smoothing_sets", c.smoothing_sets);
    c.capacity = get_or<int>(j, "capacity", c.capacity);
    c.subdivisions = get_or<int>(j, "subdivisions", c.subdivisions);
    c.anscombe = get_or<bool>(j, "anscombe", c.anscombe);
    const auto form = get_or<std::string>(j, "low_rate_form", "hump");
    if (form == "hump") {
        c.curves.form = sim::LowRateForm::hump;
    } else if (form == "literal_clamped") {
        c.curves.form = sim::LowRateForm::literal_clamped;
    } else {
        throw FieldError("low_rate_form", "must be \"hump\" or \"literal_clamped\"");
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw FieldError("config", e.what());
    }
    return c;
}

json to_json(const sim::SimConfig& c) {
    return {{"scenarios", c.scenarios},
            {"out_of_sample", c.out_of_sample},
            {"seed", c.seed},
            {"open_weights", c.open_weights},
            {"smoothing_sets", c.smoothing_sets},
            {"capacity", c.capacity},
            {"subdivisions", c.subdivisions},
            {"anscombe", c.anscombe},
            {"low_rate_form", c.curves.form == sim::LowRateForm::hump ? "hump" : "literal_clamped"}};
}

json to_json(const sim::StudyReport& r) {
    json studies = json::array();
    for (const auto& s : r.studies) {
        json oos = json::array();
        for (const auto& o : s.out_of_sample) {
            oos.push_back({{"vs_true", o.vs_true},
                           {"vs_fitted", o.vs_fitted},
                           {"true_stats", box(o.true_stats)},
                           {"fitted_stats", box(o.fitted_stats)}});
        }
        studies.push_back({{"smoothing", s.smoothing},
                           {"curves", to_json(s.curves)},
                           {"diagnostics", to_json(s.diagnostics)},
                           {"in_sample_wape", s.in_sample_wape},
                           {"out_of_sample", oos},
                           {"expected_revenue_minor", to_minor(s.expected_revenue)}});
    }
    return {{"seed", r.seed}, {"true_revenue_minor", to_minor(r.true_revenue)}, {"studies", studies}};
}

json to_json(const std::vector<sim::SensitivityTable>& tables) {
    json out = json::array();
    for (const auto& t : tables) {
        json cells = json::array();
        for (const auto& c : t.cells) {
            cells.push_back({{"scenarios", c.scenarios},
                             {"revenues_minor", minor_list(c.revenues)},
                             {"mean", c.mean},
                             {"sd", optional_number(c.sd)},
                             {"ci_low", optional_number(c.ci_low)},
                             {"ci_high", optional_number(c.ci_high)}});
        }
        out.push_back({{"smoothing", t.smoothing},
                       {"runs", t.runs},
                       {"between_count_sd", t.between_count_sd()},
                       {"within_count_sd", t.within_count_sd()},
                       {"cells", cells}});
    }
    return out;
}

pipeline::BacktestConfig backtest_config_from_json(const json& j) {
    pipeline::BacktestConfig c;
    if (!j.is_object()) {
        throw FieldError("config", "must be an object");
    }
    c.horizon = get_or<int>(j, "horizon", c.horizon);
    c.warmup = get_or<int>(j, "warmup", c.warmup);
    c.k = get_or<std::size_t>(j, "k", c.k);
    c.g_low = get_or<double>(j, "g_low", c.g_low);
    c.g_high = get_or<double>(j, "g_high", c.g_high);
    c.subdivisions = get_or<int>(j, "subdivisions", c.subdivisions);
    c.same_weekday = get_or<bool>(j, "same_weekday", c.same_weekday);
    c.anscombe = get_or<bool>(j, "anscombe", c.anscombe);
    if (!(c.g_low >= 0 && c.g_low <= 1)) {
        throw FieldError("g_low", "must lie in [0, 1]");
    }
    if (!(c.g_high >= 0 && c.g_high <= 1)) {
        throw FieldError("g_high", "must lie in [0, 1]");
    }
    if (c.g_low > c.g_high) {
        throw FieldError("g_low", "must not exceed g_high");
    }
    try {
        c.validate();
    } catch (const DomainError& e) {
        throw FieldError("config", e.what());
    }
    return c;
}

json to_json(const pipeline::BacktestConfig& c) {
    return {{"horizon", c.horizon}, {"warmup", c.warmup},       {"k", c.k},
            {"g_low", c.g_low},     {"g_high", c.g_high},       {"subdivisions", c.subdivisions},
            {"same_weekday", c.same_weekday}, {"anscombe", c.anscombe}};
}

json to_json(const pipeline::BacktestReport& r) {
    json targets = json::array();
    for (const auto& t : r.targets) {
        json selected = json::array();
        for (const auto& s : t.selected) {
            selected.push_back({{"date", format_date(s.date)}, {"wape", s.wape}});
        }
        json wape = json::array();
        for (const auto& w : t.rate_wape) {
            wape.push_back(optional_number(w));
        }
        targets.push_back({{"target", format_date(t.target)},
                           {"selected", selected},
                           {"short_of_k", t.short_of_k},
                           {"smoothing", t.smoothing},
                           {"observed_days", t.observed_days},
                           {"excluded", t.excluded},
                           {"diagnostics", t.diagnostics ? to_json(*t.diagnostics) : json(nullptr)},
                           {"capacity", t.capacity},
                           {"expected_revenue_minor", to_minor(t.expected_revenue)},
                           {"actual_revenue_minor", to_minor(t.actual_revenue)},
                           {"percent_change", optional_number(t.percent_change)},
                           {"rate_wape", wape},
                           {"skipped", t.skipped ? json(*t.skipped) : json(nullptr)}});
    }
    json groups = json::array();
    for (const auto& g : r.by_weekday) {
        groups.push_back(
            {{"day", g.key}, {"count", g.count}, {"mean", optional_number(g.mean)}, {"sd", optional_number(g.sd)}});
    }
    return {{"rates_minor", minor_list(r.rates)},
            {"targets", targets},
            {"by_weekday", groups},
            {"hygiene_checks", r.hygiene_checks}};
}

json to_json(const std::vector<ingestion::KpiReport>& kpis) {
    json out = json::array();
    for (const auto& k : kpis) {
        out.push_back({{"key", k.key},
                       {"adr_minor", k.adr ? json(to_minor(*k.adr)) : json(nullptr)},
                       {"revpar_minor", to_minor(k.revpar)},
                       {"occupancy", k.occupancy},
                       {"occupied", k.occupied},
                       {"available", k.available},
                       {"revenue_minor", to_minor(k.revenue)}});
    }
    return out;
}

} // namespace hrm::io
