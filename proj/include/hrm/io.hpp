#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "hrm/domain.hpp"
#include "hrm/dp.hpp"
#include "hrm/ingestion.hpp"
#include "hrm/pipeline.hpp"
#include "hrm/sim.hpp"
#include "hrm/spline.hpp"

// JSON documents exchanged with the store, the CLI and HTTP clients.
// Money travels as integer minor units in fields suffixed `_minor`.
namespace hrm::io {

using json = nlohmann::json;

/// A request or config field is missing or out of range.
class FieldError : public std::invalid_argument {
public:
    FieldError(std::string field, const std::string& message);
    std::string field;
};

std::int64_t to_minor(Money m);
Money from_minor(std::int64_t minor);

json to_json(const DemandScenario& s);
DemandScenario scenario_from_json(const json& j);

json to_json(const RateLadder& ladder);
RateLadder ladder_from_json(const json& j);

json to_json(const ingestion::PropertyConfig& p);
/// Accepts an explicit "ladder" or a "reference" property name.
ingestion::PropertyConfig property_from_json(const json& j);

json to_json(const spline::RateCurveSet& c);
spline::RateCurveSet curves_from_json(const json& j);
json to_json(const spline::FitDiagnostics& d);

/// Posted rate per (interval, remaining rooms), plus the value table.
json to_json(const dp::DpSolution& sol, const dp::ArrivalRates& rates, bool include_values = true);

sim::SimConfig sim_config_from_json(const json& j);
json to_json(const sim::SimConfig& c);
json to_json(const sim::StudyReport& r);
json to_json(const std::vector<sim::SensitivityTable>& tables);

pipeline::BacktestConfig backtest_config_from_json(const json& j);
json to_json(const pipeline::BacktestConfig& c);
json to_json(const pipeline::BacktestReport& r);

json to_json(const std::vector<ingestion::KpiReport>& kpis);

} // namespace hrm::io
