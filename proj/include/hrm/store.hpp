#pragma once

#include <filesystem>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "hrm/ingestion.hpp"
#include "hrm/pipeline.hpp"

namespace hrm {

class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Directory of raw demand scenarios for one property:
///
///     <root>/manifest.json           property, ladder, horizon, date index
///     <root>/scenarios/<date>.json   one document per check-in date
///
/// Documents are never rewritten; storing the same date again must carry
/// identical content.
class ScenarioStore : public pipeline::ScenarioSource {
public:
    /// Creates the layout, or opens an existing store of the same property.
    static ScenarioStore create(const std::filesystem::path& root, const ingestion::PropertyConfig& property);
    /// Opens an existing store and checks the manifest against the files.
    static ScenarioStore open(const std::filesystem::path& root);

    ScenarioStore(ScenarioStore&& other) noexcept;

    const ingestion::PropertyConfig& property() const { return property_; }
    const std::filesystem::path& root() const { return root_; }

    /// Returns false when an identical document already existed.
    bool put(const DemandScenario& scenario);
    bool contains(Date checkin) const;
    nlohmann::json document(Date checkin) const;

    const RateLadder& ladder() const override { return property_.ladder; }
    int horizon() const override { return property_.horizon; }
    std::vector<Date> dates() const override;
    DemandScenario load(Date checkin) const override;

private:
    ScenarioStore(std::filesystem::path root, ingestion::PropertyConfig property);
    std::filesystem::path document_path(Date d) const;
    void write_manifest() const;

    std::filesystem::path root_;
    ingestion::PropertyConfig property_;
    std::set<Date> index_;
    mutable std::shared_mutex mutex_;
};

} // namespace hrm
