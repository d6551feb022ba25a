#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "hrm/spline.hpp"
#include "hrm/store.hpp"

namespace httplib {
class Server;
}

namespace hrm::service {

using json = nlohmann::json;

struct Response {
    int status = 200;
    json body;
};

/// Request handling behind the HTTP routes, usable without a socket.
///
///   GET  /properties
///   GET  /scenarios/{date}
///   POST /fit       {dates[], g_low, g_high, transform, first_day?, last_day?}
///   POST /optimize  {fit_id, capacity, subdivisions?, include_values?}
///   POST /whatif    {fit_id, capacity, overrides: [{day | interval, remaining?, rate_minor}]}
///   POST /backtest  {first, last, config?}
///
/// Errors come back as {"error": message, "field"?: name}.
class Engine {
public:
    explicit Engine(const ScenarioStore& store);

    Response handle(const std::string& method, const std::string& path, const std::string& body);

    Response properties() const;
    Response scenario(const std::string& date) const;
    Response fit(const json& request);
    Response optimize(const json& request) const;
    Response whatif(const json& request) const;
    Response backtest(const json& request) const;

private:
    struct FitEntry {
        spline::RateCurveSet curves;
        json response;
    };
    std::shared_ptr<const FitEntry> find_fit(const json& request) const;

    const ScenarioStore& store_;
    mutable std::mutex cache_mutex_;
    std::map<std::string, std::shared_ptr<const FitEntry>> fits_;
};

/// Registers the routes on `server`.
void mount(httplib::Server& server, Engine& engine);

struct BindAddress {
    std::string host = "127.0.0.1";
    int port = 8080;
};

/// Parses "host:port"; an empty text gives the default address.
BindAddress parse_bind_address(const std::string& text);
/// Reads HRM_BIND, falling back to 127.0.0.1:8080.
BindAddress bind_address_from_env();

/// Serves until the process is stopped. Returns false when binding fails.
bool serve(Engine& engine, const BindAddress& address);

/// Stable 64-bit FNV-1a digest, hex encoded; names cached fits.
std::string digest(const std::string& text);

} // namespace hrm::service
