#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrm/domain.hpp"
#include "hrm/lp.hpp"

namespace hrm::spline {

/// One cubic a + b·u + c·u² + d·u³ in the local coordinate u = x - x0,
/// valid on [x0, x1].
struct CubicPiece {
    double a = 0, b = 0, c = 0, d = 0;
    double x0 = 0, x1 = 0;

    double value(double x) const;
    double slope(double x) const;
    double curvature(double x) const;
};

struct RateCurve {
    std::vector<CubicPiece> pieces;
    double smoothing = 0;
    /// Set when the rate had too few observation days to be fitted.
    bool excluded = false;
};

/// Fitted demand curves, one per rate class, sharing a knot vector.
struct RateCurveSet {
    std::vector<double> knots;
    std::vector<Money> rates; ///< ascending, index matches `curves`
    std::vector<RateCurve> curves;
    bool anscombe = false;

    std::size_t rate_count() const { return curves.size(); }
    double first_knot() const { return knots.front(); }
    double last_knot() const { return knots.back(); }
    bool has_curve(std::size_t rate) const { return rate < curves.size() && !curves[rate].excluded; }
    /// Raw polynomial value on the fitting scale (before any read-back transform).
    double raw_value(std::size_t rate, double x) const;
};

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A rate class with fewer than three distinct observed horizon days.
class DegenerateRateError : public FitError {
public:
    DegenerateRateError(std::size_t rate, std::size_t distinct_days);
    std::size_t rate;
};

struct FitDiagnostics {
    double objective = 0;
    std::vector<double> weighted_error; ///< per rate, Σ w·|e|
    std::vector<double> curvature;      ///< per rate, Σ |second difference|
    std::size_t variables = 0;
    std::size_t constraints = 0;
    std::size_t iterations = 0;
    /// Largest S_{r+1}(x) - S_r(x) found between knots (ordering is only enforced at knots).
    double between_knot_ordering_gap = 0;
};

/// Decision-variable count: every model variable with its companion.
std::size_t count_decision_vars(std::size_t knots, std::size_t rates);

struct FitOptions {
    std::vector<double> smoothing; ///< one g per rate class, each in [0, 1]
    bool anscombe = false;
    /// Horizon days [first_day, last_day] to fit; 0 means the scenario bounds.
    int first_day = 0;
    int last_day = 0;
    /// Rates to leave out of the program; ordering then chains over the rest.
    std::vector<bool> exclude;
};

/// Observations per rate and knot, already on the fitting scale.
struct Observations {
    std::vector<double> knots;
    /// [rate][knot] → observed values (empty when the cell was never observed)
    std::vector<std::vector<std::vector<double>>> values;
};

Observations collect_observations(std::span<const DemandScenario> scenarios, const FitOptions& options);

/// Variable indices of one rate's block inside the program.
struct RateBlock {
    std::vector<lp::VarId> coef; ///< 4 per piece: a, b, c, d
    std::vector<lp::VarId> error;
    std::vector<std::size_t> error_knot;
    std::vector<double> target;
    std::vector<double> weight;
    std::vector<lp::VarId> second_diff;
    bool excluded = false;
};

struct FitProgram {
    lp::LpProblem problem;
    std::vector<double> knots;
    std::vector<Money> rates;
    std::vector<double> smoothing;
    bool anscombe = false;
    /// Data were divided by this before building; coefficients scale back by it.
    double scale = 1.0;
    std::vector<RateBlock> blocks;

    std::size_t included_rate_count() const;
};

FitProgram build_fit_program(std::span<const DemandScenario> scenarios, const RateLadder& ladder,
                             const FitOptions& options);

/// Same, from pre-collected observations (targets already transformed if requested).
FitProgram build_fit_program(const Observations& obs, const std::vector<Money>& rates, const FitOptions& options);

struct FitResult {
    RateCurveSet curves;
    FitDiagnostics diagnostics;
};

FitResult fit_curves(const FitProgram& program, const lp::Tolerances& tol = {});

/// Demand rate of `rate` at horizon position x, clamped at zero; squares on
/// read-back when the curves were fitted on square-rooted data.
double evaluate_curve(const RateCurveSet& curves, std::size_t rate, double x);

/// Largest invariant deviations, normalized by the largest knot value.
struct CurveChecks {
    double c0 = 0, c1 = 0, c2 = 0;
    double endpoint_slope = 0;
    double min_knot_value = 0;
    double ordering_gap = 0; ///< max over knots of S_{r+1}(x_k) - S_r(x_k), unnormalized
};

CurveChecks check_curves(const RateCurveSet& curves);

/// Objective recomputed from curves and program data, independent of solver state.
double recompute_objective(const FitProgram& program, const RateCurveSet& curves);

} // namespace hrm::spline
