#include "hrm/service.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <set>

#include <httplib.h>

#include "hrm/dp.hpp"
#include "hrm/io.hpp"
#include "hrm/pipeline.hpp"

namespace hrm::service {

using io::FieldError;

std::string digest(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

Response error(int status, const std::string& message, const std::string& field = {}) {
    json body = {{"error", message}};
    if (!field.empty()) {
        body["field"] = field;
    }
    return {status, body};
}

Date date_field(const json& j, const std::string& name) {
    if (!j.contains(name) || !j.at(name).is_string()) {
        throw FieldError(name, "must be an ISO date string");
    }
    try {
        return parse_date(j.at(name).get<std::string>());
    } catch (const std::exception&) {
        throw FieldError(name, "is not an ISO date");
    }
}

double unit_field(const json& j, const std::string& name, double fallback) {
    if (!j.contains(name)) {
        return fallback;
    }
    if (!j.at(name).is_number()) {
        throw FieldError(name, "must be a number");
    }
    const double v = j.at(name).get<double>();
    if (!(v >= 0 && v <= 1)) {
        throw FieldError(name, "must lie in [0, 1]");
    }
    return v;
}

int int_field(const json& j, const std::string& name, std::optional<int> fallback, int min) {
    if (!j.contains(name)) {
        if (!fallback) {
            throw FieldError(name, "missing");
        }
        return *fallback;
    }
    if (!j.at(name).is_number_integer()) {
        throw FieldError(name, "must be an integer");
    }
    const int v = j.at(name).get<int>();
    if (v < min) {
        throw FieldError(name, "must be at least " + std::to_string(min));
    }
    return v;
}

} // namespace

Engine::Engine(const ScenarioStore& store) : store_(store) {}

Response Engine::properties() const {
    const auto dates = store_.dates();
    json p = io::to_json(store_.property());
    p["scenario_count"] = dates.size();
    p["first_date"] = dates.empty() ? json(nullptr) : json(format_date(dates.front()));
    p["last_date"] = dates.empty() ? json(nullptr) : json(format_date(dates.back()));
    return {200, json::array({p})};
}

Response Engine::scenario(const std::string& date) const {
    Date d;
    try {
        d = parse_date(date);
    } catch (const std::exception&) {
        return error(400, "not an ISO date: " + date, "date");
    }
    if (!store_.contains(d)) {
        return error(404, "no scenario for " + date);
    }
    return {200, store_.document(d)};
}

Response Engine::fit(const json& request) {
    if (!request.is_object()) {
        throw FieldError("body", "must be a JSON object");
    }
    if (!request.contains("dates") || !request.at("dates").is_array() || request.at("dates").empty()) {
        throw FieldError("dates", "must be a nonempty list of ISO dates");
    }
    std::set<Date> dates;
    for (const auto& d : request.at("dates")) {
        if (!d.is_string()) {
            throw FieldError("dates", "must hold ISO date strings");
        }
        try {
            dates.insert(parse_date(d.get<std::string>()));
        } catch (const std::exception&) {
            throw FieldError("dates", "holds a malformed date: " + d.get<std::string>());
        }
    }
    const double g_low = unit_field(request, "g_low", 0.4);
    const double g_high = unit_field(request, "g_high", 0.7);
    if (g_low > g_high) {
        throw FieldError("g_low", "must not exceed g_high");
    }
    bool transform = false;
    if (request.contains("transform")) {
        if (!request.at("transform").is_boolean()) {
            throw FieldError("transform", "must be a boolean");
        }
        transform = request.at("transform").get<bool>();
    }
    const int horizon = store_.horizon();
    const int first = int_field(request, "first_day", std::max(1, horizon - 27), 1);
    const int last = int_field(request, "last_day", horizon, 1);
    if (last > horizon || last - first < 2) {
        throw FieldError("last_day", "window must hold at least 3 days inside the horizon");
    }

    const auto smoothing = pipeline::interpolate_smoothing(store_.ladder(), g_low, g_high);
    json key = {{"dates", json::array()}, {"smoothing", smoothing}, {"transform", transform},
                {"first_day", first},     {"last_day", last}};
    for (Date d : dates) {
        key["dates"].push_back(format_date(d));
    }
    const std::string id = digest(key.dump());
    {
        std::lock_guard lock(cache_mutex_);
        if (auto it = fits_.find(id); it != fits_.end()) {
            return {200, it->second->response};
        }
    }

    std::vector<DemandScenario> raw;
    for (Date d : dates) {
        if (!store_.contains(d)) {
            return error(404, "no scenario for " + format_date(d), "dates");
        }
        raw.push_back(store_.load(d));
    }
    const auto days = pipeline::evidence_days(raw, first, last);
    spline::FitOptions opt;
    opt.smoothing = smoothing;
    opt.anscombe = transform;
    opt.first_day = first;
    opt.last_day = last;
    for (std::size_t n : days) {
        opt.exclude.push_back(n < 3);
    }
    if (std::all_of(opt.exclude.begin(), opt.exclude.end(), [](bool e) { return e; })) {
        throw FieldError("dates", "no rate has 3 observed days in the window");
    }
    std::vector<DemandScenario> inputs;
    for (const auto& s : raw) {
        inputs.push_back(cumulate_choice_sets(s));
    }
    auto result = spline::fit_curves(spline::build_fit_program(inputs, store_.ladder(), opt));

    auto entry = std::make_shared<FitEntry>();
    entry->response = {{"fit_id", id},
                       {"request", key},
                       {"curves", io::to_json(result.curves)},
                       {"diagnostics", io::to_json(result.diagnostics)},
                       {"observed_days", days},
                       {"excluded", opt.exclude}};
    entry->curves = std::move(result.curves);
    std::lock_guard lock(cache_mutex_);
    const auto& stored = fits_.emplace(id, std::move(entry)).first->second;
    return {200, stored->response};
}

std::shared_ptr<const Engine::FitEntry> Engine::find_fit(const json& request) const {
    if (!request.is_object() || !request.contains("fit_id") || !request.at("fit_id").is_string()) {
        throw FieldError("fit_id", "missing");
    }
    std::lock_guard lock(cache_mutex_);
    const auto it = fits_.find(request.at("fit_id").get<std::string>());
    return it == fits_.end() ? nullptr : it->second;
}

Response Engine::optimize(const json& request) const {
    const auto entry = find_fit(request);
    if (!entry) {
        return error(404, "unknown fit", "fit_id");
    }
    const int capacity = int_field(request, "capacity", std::nullopt, 0);
    const int subdivisions = int_field(request, "subdivisions", 8, 1);
    bool values = true;
    if (request.contains("include_values") && request.at("include_values").is_boolean()) {
        values = request.at("include_values").get<bool>();
    }
    const auto grid = dp::refine_time_grid(entry->curves, subdivisions);
    const auto sol = dp::solve_dp(grid, capacity);
    json body = io::to_json(sol, grid, values);
    body["fit_id"] = request.at("fit_id");
    return {200, body};
}

Response Engine::whatif(const json& request) const {
    const auto entry = find_fit(request);
    if (!entry) {
        return error(404, "unknown fit", "fit_id");
    }
    const int capacity = int_field(request, "capacity", std::nullopt, 0);
    const int subdivisions = int_field(request, "subdivisions", 8, 1);
    const auto grid = dp::refine_time_grid(entry->curves, subdivisions);
    const auto sol = dp::solve_dp(grid, capacity);

    auto price_index = [&](const json& o) {
        if (!o.contains("rate_minor") || !o.at("rate_minor").is_number_integer()) {
            throw FieldError("overrides", "each override needs an integer rate_minor");
        }
        const auto minor = o.at("rate_minor").get<std::int64_t>();
        for (std::size_t j = 0; j < grid.prices.size(); ++j) {
            if (io::to_minor(grid.prices[j]) == minor) {
                return static_cast<int>(j);
            }
        }
        throw FieldError("overrides", "rate " + std::to_string(minor) + " is not on the ladder");
    };

    // (interval, remaining) → price index; remaining -1 covers every capacity level
    std::map<std::pair<std::size_t, int>, int> fixed;
    std::map<int, int> by_day;
    const json overrides = request.value("overrides", json::array());
    if (!overrides.is_array()) {
        throw FieldError("overrides", "must be a list");
    }
    for (const auto& o : overrides) {
        if (!o.is_object()) {
            throw FieldError("overrides", "entries must be objects");
        }
        const int j = price_index(o);
        if (o.contains("interval")) {
            const int i = int_field(o, "interval", std::nullopt, 0);
            if (static_cast<std::size_t>(i) >= grid.interval_count()) {
                throw FieldError("overrides", "interval " + std::to_string(i) + " is outside the grid");
            }
            const int x = o.contains("remaining") ? int_field(o, "remaining", std::nullopt, 1) : -1;
            fixed[{static_cast<std::size_t>(i), x}] = j;
        } else if (o.contains("day")) {
            const int day = int_field(o, "day", std::nullopt, 1);
            if (std::find(grid.day_of_interval.begin(), grid.day_of_interval.end(), day) ==
                grid.day_of_interval.end()) {
                throw FieldError("overrides", "day " + std::to_string(day) + " is outside the fitted window");
            }
            by_day[day] = j;
        } else {
            throw FieldError("overrides", "each override needs a day or an interval");
        }
    }

    const double value = dp::evaluate_policy(grid, capacity, [&](std::size_t t, int x) {
        if (auto it = fixed.find({t, x}); it != fixed.end()) {
            return it->second;
        }
        if (auto it = fixed.find({t, -1}); it != fixed.end()) {
            return it->second;
        }
        if (auto it = by_day.find(grid.day_of_interval[t]); it != by_day.end()) {
            return it->second;
        }
        return sol.policy(t, static_cast<std::size_t>(x));
    });
    const double optimal = sol.expected_revenue;
    json body = {{"fit_id", request.at("fit_id")},
                 {"capacity", capacity},
                 {"expected_revenue_minor", io::to_minor(value)},
                 {"optimal_revenue_minor", io::to_minor(optimal)},
                 {"delta_minor", io::to_minor(value) - io::to_minor(optimal)},
                 {"gap_percent", optimal > 0 ? json(100.0 * (value - optimal) / optimal) : json(nullptr)}};
    return {200, body};
}

Response Engine::backtest(const json& request) const {
    if (!request.is_object()) {
        throw FieldError("body", "must be a JSON object");
    }
    const Date first = date_field(request, "first");
    const Date last = date_field(request, "last");
    if (last < first) {
        throw FieldError("last", "is before first");
    }
    const auto config = io::backtest_config_from_json(request.value("config", json::object()));
    std::vector<Date> targets;
    for (Date d : store_.dates()) {
        if (d >= first && d <= last) {
            targets.push_back(d);
        }
    }
    const auto report = pipeline::run_backtest(store_, targets, config);
    json body = io::to_json(report);
    body["tables"] = {{"weekday_csv", pipeline::weekday_table_csv(report)},
                      {"rate_wape_csv", pipeline::rate_wape_csv(report)}};
    return {200, body};
}

Response Engine::handle(const std::string& method, const std::string& path, const std::string& body) {
    try {
        if (method == "GET") {
            if (path == "/properties") {
                return properties();
            }
            const std::string prefix = "/scenarios/";
            if (path.rfind(prefix, 0) == 0) {
                return scenario(path.substr(prefix.size()));
            }
            return error(404, "no route for GET " + path);
        }
        if (method == "POST") {
            json request;
            try {
                request = body.empty() ? json::object() : json::parse(body);
            } catch (const json::parse_error& e) {
                return error(400, std::string("malformed JSON: ") + e.what(), "body");
            }
            if (path == "/fit") {
                return fit(request);
            }
            if (path == "/optimize") {
                return optimize(request);
            }
            if (path == "/whatif") {
                return whatif(request);
            }
            if (path == "/backtest") {
                return backtest(request);
            }
            return error(404, "no route for POST " + path);
        }
        return error(405, "method not allowed");
    } catch (const FieldError& e) {
        return error(400, e.what(), e.field);
    } catch (const std::out_of_range& e) {
        return error(404, e.what());
    } catch (const std::invalid_argument& e) {
        return error(400, e.what());
    } catch (const std::exception& e) {
        return error(500, e.what());
    }
}

void mount(httplib::Server& server, Engine& engine) {
    auto forward = [&engine](const httplib::Request& req, httplib::Response& res) {
        const Response r = engine.handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server.Get(".*", forward);
    server.Post(".*", forward);
}

BindAddress parse_bind_address(const std::string& text) {
    BindAddress a;
    if (text.empty()) {
        return a;
    }
    const auto colon = text.rfind(':');
    if (colon == std::string::npos) {
        a.host = text;
        return a;
    }
    a.host = text.substr(0, colon);
    try {
        std::size_t used = 0;
        a.port = std::stoi(text.substr(colon + 1), &used);
        if (used != text.size() - colon - 1 || a.port < 0 || a.port > 65535) {
            throw std::invalid_argument("port");
        }
    } catch (const std::exception&) {
        throw std::invalid_argument("bad bind address: " + text);
    }
    if (a.host.empty()) {
        a.host = "127.0.0.1";
    }
    return a;
}

BindAddress bind_address_from_env() {
    const char* v = std::getenv("HRM_BIND");
    return parse_bind_address(v ? v : "");
}

bool serve(Engine& engine, const BindAddress& address) {
    httplib::Server server;
    mount(server, engine);
    return server.listen(address.host, address.port);
}

} // namespace hrm::service
