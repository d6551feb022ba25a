#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "hrm/domain.hpp"
#include "hrm/dp.hpp"
#include "hrm/spline.hpp"

namespace hrm::sim {

/// Shape of the lowest class's curve. The printed 0.43·sin(t) oscillates with
/// a period of about six days; `hump` reads it as one arc over the horizon.
enum class LowRateForm { hump, literal_clamped };

struct TrueCurveSpec {
    int horizon = 28;
    std::vector<Money> prices{100, 200, 300};
    LowRateForm form = LowRateForm::hump;
};

/// Known per-class arrival rates. Class 0 is the cheapest price; cumulated
/// demand at class r adds every class with a price at or above it.
class TrueCurves {
public:
    explicit TrueCurves(TrueCurveSpec spec);

    const TrueCurveSpec& spec() const { return spec_; }
    std::size_t class_count() const { return spec_.prices.size(); }

    double individual(std::size_t cls, double t) const;
    double cumulated(std::size_t cls, double t) const;
    /// Number of day evaluations (t = 1..T, all classes) clamped from below zero.
    std::size_t clamped_evaluations() const { return clamped_; }

    dp::DailyDemand cumulated_demand() const;

private:
    double unclamped(std::size_t cls, double t) const;

    TrueCurveSpec spec_;
    std::size_t clamped_ = 0;
};

TrueCurves generate_true_curves(const TrueCurveSpec& spec);

struct SimConfig {
    TrueCurveSpec curves;
    std::size_t scenarios = 50;
    std::size_t out_of_sample = 100;
    std::uint64_t seed = 2021;
    /// Chance of each class being the open rate on a day; empty = uniform.
    std::vector<double> open_weights;
    std::vector<std::vector<double>> smoothing_sets{{0.1, 0.2, 0.3}, {0.7, 0.8, 0.9}};
    int capacity = 100;
    int subdivisions = 8;
    bool anscombe = false;

    /// Throws std::invalid_argument on an inconsistent configuration.
    void validate() const;
};

/// One scenario per entry: each day one class is open and its choice-set
/// demand is drawn from a Poisson law. Only the open cell is observed.
std::vector<DemandScenario> simulate_scenarios(const TrueCurves& curves, std::size_t count,
                                               const std::vector<double>& open_weights, std::mt19937_64& rng);

struct BoxStats {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
    std::size_t count = 0;
};

BoxStats box_stats(std::vector<double> values);

struct OutOfSample {
    std::vector<double> vs_true;   ///< per-scenario WAPE with the true curve as forecast
    std::vector<double> vs_fitted; ///< same scenarios, fitted curve as forecast
    BoxStats true_stats;
    BoxStats fitted_stats;
};

struct SmoothingStudy {
    std::vector<double> smoothing;
    spline::RateCurveSet curves;
    spline::FitDiagnostics diagnostics;
    std::vector<double> in_sample_wape; ///< per class, fraction
    std::vector<OutOfSample> out_of_sample;
    double expected_revenue = 0;
};

struct StudyReport {
    std::uint64_t seed = 0;
    double true_revenue = 0;
    std::vector<SmoothingStudy> studies;
};

/// Fits the in-sample scenarios under each smoothing set, scores in- and
/// out-of-sample WAPE and prices the fitted curves.
StudyReport run_simulation_study(const SimConfig& config);

/// Fit one smoothing set on freshly simulated scenarios and return the DP revenue.
double fitted_revenue(const TrueCurves& curves, const SimConfig& config, const std::vector<double>& smoothing,
                      std::size_t scenarios, std::uint64_t seed);

/// Expected optimal revenue when the true curves are known.
double true_curve_revenue(const TrueCurves& curves, int capacity, int subdivisions);

struct SensitivityConfig {
    SimConfig base;
    std::size_t min_scenarios = 10;
    std::size_t max_scenarios = 50;
    std::size_t step = 1;
    std::size_t repetitions = 10;
    std::size_t workers = 0;
};

struct SensitivityCell {
    std::size_t scenarios = 0;
    std::vector<double> revenues;
    double mean = 0;
    std::optional<double> sd;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
};

struct SensitivityTable {
    std::vector<double> smoothing;
    std::vector<SensitivityCell> cells;
    std::size_t runs = 0;

    /// Standard deviation of cell means across scenario counts.
    double between_count_sd() const;
    /// Average within-cell standard deviation.
    double within_count_sd() const;
};

std::vector<SensitivityTable> run_sensitivity(const SensitivityConfig& config);

/// Seed for an independent stream identified by (base, a, b, c).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

} // namespace hrm::sim
