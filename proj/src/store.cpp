#include "hrm/store.hpp"

#include <fstream>
#include <mutex>

#include "hrm/io.hpp"

namespace hrm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in) {
        throw StoreError("cannot read " + p.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw StoreError(p.string() + ": " + e.what());
    }
}

void write_json(const fs::path& p, const json& j) {
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw StoreError("cannot write " + tmp.string());
        }
        out << j.dump(1) << '\n';
        if (!out) {
            throw StoreError("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, p);
}

} // namespace

ScenarioStore::ScenarioStore(fs::path root, ingestion::PropertyConfig property)
    : root_(std::move(root)), property_(std::move(property)) {}

ScenarioStore::ScenarioStore(ScenarioStore&& other) noexcept
    : root_(std::move(other.root_)), property_(std::move(other.property_)), index_(std::move(other.index_)) {}

ScenarioStore ScenarioStore::create(const fs::path& root, const ingestion::PropertyConfig& property) {
    property.validate();
    if (fs::exists(root / "manifest.json")) {
        ScenarioStore existing = open(root);
        if (io::to_json(existing.property()) != io::to_json(property)) {
            throw StoreError(root.string() + " already holds a store for a different property");
        }
        return existing;
    }
    fs::create_directories(root / "scenarios");
    ScenarioStore store(root, property);
    store.write_manifest();
    return store;
}

ScenarioStore ScenarioStore::open(const fs::path& root) {
    const json manifest = read_json(root / "manifest.json");
    ingestion::PropertyConfig property;
    try {
        property = io::property_from_json(manifest.at("property"));
    } catch (const std::exception& e) {
        throw StoreError("bad manifest in " + root.string() + ": " + e.what());
    }
    ScenarioStore store(root, property);
    for (const auto& d : manifest.value("dates", json::array())) {
        store.index_.insert(parse_date(d.get<std::string>()));
    }
    for (Date d : store.index_) {
        if (!fs::exists(store.document_path(d))) {
            throw StoreError("manifest lists " + format_date(d) + " but its document is missing");
        }
    }
    if (fs::exists(root / "scenarios")) {
        for (const auto& entry : fs::directory_iterator(root / "scenarios")) {
            if (entry.path().extension() != ".json") {
                continue;
            }
            const Date d = parse_date(entry.path().stem().string());
            if (!store.index_.contains(d)) {
                throw StoreError("document " + entry.path().filename().string() + " is not in the manifest");
            }
        }
    }
    return store;
}

fs::path ScenarioStore::document_path(Date d) const {
    return root_ / "scenarios" / (format_date(d) + ".json");
}

void ScenarioStore::write_manifest() const {
    json dates = json::array();
    for (Date d : index_) {
        dates.push_back(format_date(d));
    }
    write_json(root_ / "manifest.json", {{"property", io::to_json(property_)}, {"dates", dates}});
}

bool ScenarioStore::put(const DemandScenario& scenario) {
    if (scenario.rate_count() != property_.ladder.size() || scenario.horizon() != property_.horizon) {
        throw StoreError("scenario " + format_date(scenario.checkin) + " does not match the store's ladder and horizon");
    }
    if (scenario.cumulated) {
        throw StoreError("the store keeps raw scenarios only");
    }
    const json doc = io::to_json(scenario);
    std::unique_lock lock(mutex_);
    if (index_.contains(scenario.checkin)) {
        if (read_json(document_path(scenario.checkin)) != doc) {
            throw StoreError("scenario " + format_date(scenario.checkin) + " is already stored with other content");
        }
        return false;
    }
    write_json(document_path(scenario.checkin), doc);
    index_.insert(scenario.checkin);
    write_manifest();
    return true;
}

bool ScenarioStore::contains(Date checkin) const {
    std::shared_lock lock(mutex_);
    return index_.contains(checkin);
}

json ScenarioStore::document(Date checkin) const {
    {
        std::shared_lock lock(mutex_);
        if (!index_.contains(checkin)) {
            throw std::out_of_range("no scenario for " + format_date(checkin));
        }
    }
    return read_json(document_path(checkin));
}

std::vector<Date> ScenarioStore::dates() const {
    std::shared_lock lock(mutex_);
    return {index_.begin(), index_.end()};
}

DemandScenario ScenarioStore::load(Date checkin) const {
    return io::scenario_from_json(document(checkin));
}

} // namespace hrm
