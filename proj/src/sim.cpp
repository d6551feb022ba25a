#include "hrm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "hrm/metrics.hpp"
#include "hrm/parallel.hpp"

namespace hrm::sim {

TrueCurves::TrueCurves(TrueCurveSpec spec) : spec_(std::move(spec)) {
    if (spec_.prices.size() != 3) {
        throw std::invalid_argument("the reference curves define exactly three rate classes");
    }
    if (spec_.horizon < 3) {
        throw std::invalid_argument("simulation horizon needs at least 3 days");
    }
    for (std::size_t c = 0; c < class_count(); ++c) {
        for (int t = 1; t <= spec_.horizon; ++t) {
            if (unclamped(c, t) < 0) {
                ++clamped_;
            }
        }
    }
}

double TrueCurves::unclamped(std::size_t cls, double t) const {
    switch (cls) {
    case 0:
        if (spec_.form == LowRateForm::hump) {
            return 0.43 * std::sin(std::numbers::pi * t / spec_.horizon);
        }
        return 0.43 * std::sin(t);
    case 1:
        return 0.16 * t;
    case 2:
        return 0.02 * std::exp(0.18 * t);
    default:
        throw std::out_of_range("rate class " + std::to_string(cls));
    }
}

double TrueCurves::individual(std::size_t cls, double t) const {
    return std::max(0.0, unclamped(cls, t));
}

double TrueCurves::cumulated(std::size_t cls, double t) const {
    double sum = 0;
    for (std::size_t c = cls; c < class_count(); ++c) {
        sum += individual(c, t);
    }
    return sum;
}

dp::DailyDemand TrueCurves::cumulated_demand() const {
    return [this](std::size_t cls, int day) { return cumulated(cls, day); };
}

TrueCurves generate_true_curves(const TrueCurveSpec& spec) {
    return TrueCurves(spec);
}

void SimConfig::validate() const {
    if (scenarios < 1) {
        throw std::invalid_argument("scenario count must be at least 1");
    }
    if (!open_weights.empty()) {
        if (open_weights.size() != curves.prices.size()) {
            throw std::invalid_argument("need one open-rate weight per class");
        }
        double sum = 0;
        for (double w : open_weights) {
            if (w < 0) {
                throw std::invalid_argument("open-rate weights must be nonnegative");
            }
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw std::invalid_argument("open-rate weights must sum to 1");
        }
    }
    for (const auto& set : smoothing_sets) {
        if (set.size() != curves.prices.size()) {
            throw std::invalid_argument("each smoothing set needs one value per class");
        }
        for (double g : set) {
            if (!(g >= 0 && g <= 1)) {
                throw std::invalid_argument("smoothing values must lie in [0, 1]");
            }
        }
    }
    if (capacity < 0 || subdivisions < 1) {
        throw std::invalid_argument("capacity must be >= 0 and subdivisions >= 1");
    }
}

std::vector<DemandScenario> simulate_scenarios(const TrueCurves& curves, std::size_t count,
                                               const std::vector<double>& open_weights, std::mt19937_64& rng) {
    const std::size_t classes = curves.class_count();
    const int horizon = curves.spec().horizon;
    std::vector<double> weights = open_weights;
    if (weights.empty()) {
        weights.assign(classes, 1.0);
    }
    std::discrete_distribution<std::size_t> pick_open(weights.begin(), weights.end());

    std::vector<DemandScenario> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        DemandScenario sc(Date{std::chrono::days{static_cast<int>(s)}}, classes, horizon);
        sc.cumulated = true;
        sc.observed.assign(classes, std::vector<bool>(static_cast<std::size_t>(horizon), false));
        for (int t = 1; t <= horizon; ++t) {
            const std::size_t open = pick_open(rng);
            const double lambda = curves.cumulated(open, t);
            int arrivals = 0;
            if (lambda > 0) {
                arrivals = std::poisson_distribution<int>(lambda)(rng);
            }
            sc.observed[open][static_cast<std::size_t>(t - 1)] = true;
            sc.at(open, t) = arrivals;
            sc.revenue[static_cast<std::size_t>(t - 1)] = arrivals * curves.spec().prices[open];
        }
        out.push_back(std::move(sc));
    }
    return out;
}

BoxStats box_stats(std::vector<double> v) {
    BoxStats b;
    b.count = v.size();
    if (v.empty()) {
        return b;
    }
    std::sort(v.begin(), v.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    b.min = v.front();
    b.max = v.back();
    b.q1 = quantile(0.25);
    b.median = quantile(0.5);
    b.q3 = quantile(0.75);
    b.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    return b;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                      static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(c)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

spline::FitResult fit(const std::vector<DemandScenario>& scenarios, const TrueCurves& curves,
                      const std::vector<double>& smoothing, bool anscombe) {
    const auto& p = curves.spec().prices;
    const RateLadder ladder(p.front(), p.back(), p[1] - p[0]);
    spline::FitOptions opt;
    opt.smoothing = smoothing;
    opt.anscombe = anscombe;
    return spline::fit_curves(spline::build_fit_program(scenarios, ladder, opt));
}

double price_curves(const spline::RateCurveSet& curves, int capacity, int subdivisions) {
    return dp::solve_dp(dp::refine_time_grid(curves, subdivisions), capacity).expected_revenue;
}

/// WAPE of one scenario's observed cells of class r against a forecast curve;
/// nullopt when nothing was booked in those cells.
template <class Forecast>
std::optional<double> scenario_wape(const DemandScenario& s, std::size_t r, Forecast&& f) {
    std::vector<double> a;
    std::vector<double> fc;
    for (int t = 1; t <= s.horizon(); ++t) {
        if (s.is_observed(r, t)) {
            a.push_back(s.at(r, t));
            fc.push_back(f(t));
        }
    }
    if (std::accumulate(a.begin(), a.end(), 0.0) <= 0) {
        return std::nullopt;
    }
    return metrics::wape(a, fc).value;
}

} // namespace

double true_curve_revenue(const TrueCurves& curves, int capacity, int subdivisions) {
    const auto rates =
        dp::refine_time_grid(curves.cumulated_demand(), curves.spec().prices, 1, curves.spec().horizon, subdivisions);
    return dp::solve_dp(rates, capacity).expected_revenue;
}

double fitted_revenue(const TrueCurves& curves, const SimConfig& config, const std::vector<double>& smoothing,
                      std::size_t scenarios, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto data = simulate_scenarios(curves, scenarios, config.open_weights, rng);
    const auto res = fit(data, curves, smoothing, config.anscombe);
    return price_curves(res.curves, config.capacity, config.subdivisions);
}

StudyReport run_simulation_study(const SimConfig& config) {
    config.validate();
    const TrueCurves curves = generate_true_curves(config.curves);
    StudyReport report;
    report.seed = config.seed;
    report.true_revenue = true_curve_revenue(curves, config.capacity, config.subdivisions);

    std::mt19937_64 in_rng(derive_seed(config.seed, 1));
    const auto in_sample = simulate_scenarios(curves, config.scenarios, config.open_weights, in_rng);
    std::mt19937_64 out_rng(derive_seed(config.seed, 2));
    const auto fresh = simulate_scenarios(curves, config.out_of_sample, config.open_weights, out_rng);
    const std::size_t classes = curves.class_count();

    for (const auto& smoothing : config.smoothing_sets) {
        SmoothingStudy study;
        study.smoothing = smoothing;
        auto res = fit(in_sample, curves, smoothing, config.anscombe);
        study.curves = std::move(res.curves);
        study.diagnostics = std::move(res.diagnostics);
        study.expected_revenue = price_curves(study.curves, config.capacity, config.subdivisions);

        for (std::size_t r = 0; r < classes; ++r) {
            std::vector<double> actual;
            std::vector<double> forecast;
            for (int t = 1; t <= curves.spec().horizon; ++t) {
                double sum = 0;
                std::size_t n = 0;
                for (const auto& s : in_sample) {
                    if (s.is_observed(r, t)) {
                        sum += s.at(r, t);
                        ++n;
                    }
                }
                if (n == 0) {
                    continue;
                }
                actual.push_back(sum / static_cast<double>(n));
                forecast.push_back(spline::evaluate_curve(study.curves, r, t));
            }
            study.in_sample_wape.push_back(metrics::wape(actual, forecast).value);

            OutOfSample oos;
            for (const auto& s : fresh) {
                const auto vt = scenario_wape(s, r, [&](int t) { return curves.cumulated(r, t); });
                const auto vf = scenario_wape(s, r, [&](int t) { return spline::evaluate_curve(study.curves, r, t); });
                if (vt && vf) {
                    oos.vs_true.push_back(*vt);
                    oos.vs_fitted.push_back(*vf);
                }
            }
            oos.true_stats = box_stats(oos.vs_true);
            oos.fitted_stats = box_stats(oos.vs_fitted);
            study.out_of_sample.push_back(std::move(oos));
        }
        report.studies.push_back(std::move(study));
    }
    return report;
}

double SensitivityTable::between_count_sd() const {
    if (cells.size() < 2) {
        return 0;
    }
    double mean = 0;
    for (const auto& c : cells) {
        mean += c.mean;
    }
    mean /= static_cast<double>(cells.size());
    double ss = 0;
    for (const auto& c : cells) {
        ss += (c.mean - mean) * (c.mean - mean);
    }
    return std::sqrt(ss / static_cast<double>(cells.size() - 1));
}

double SensitivityTable::within_count_sd() const {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& c : cells) {
        if (c.sd) {
            sum += *c.sd;
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

std::vector<SensitivityTable> run_sensitivity(const SensitivityConfig& config) {
    config.base.validate();
    if (config.min_scenarios < 1 || config.max_scenarios < config.min_scenarios || config.step < 1 ||
        config.repetitions < 1) {
        throw std::invalid_argument("invalid sensitivity sweep bounds");
    }
    const TrueCurves curves = generate_true_curves(config.base.curves);
    std::vector<std::size_t> counts;
    for (std::size_t n = config.min_scenarios; n <= config.max_scenarios; n += config.step) {
        counts.push_back(n);
    }

    std::vector<SensitivityTable> tables;
    for (std::size_t set = 0; set < config.base.smoothing_sets.size(); ++set) {
        SensitivityTable table;
        table.smoothing = config.base.smoothing_sets[set];
        table.cells.resize(counts.size());
        const std::size_t runs = counts.size() * config.repetitions;
        std::vector<double> revenue(runs);
        parallel_for(
            runs,
            [&](std::size_t i) {
                const std::size_t cell = i / config.repetitions;
                const std::size_t rep = i % config.repetitions;
                // the same scenario draws are shared by both smoothing sets
                const auto seed = derive_seed(config.base.seed, 3, counts[cell], rep);
                revenue[i] = fitted_revenue(curves, config.base, table.smoothing, counts[cell], seed);
            },
            config.workers);
        for (std::size_t cell = 0; cell < counts.size(); ++cell) {
            auto& c = table.cells[cell];
            c.scenarios = counts[cell];
            c.revenues.assign(revenue.begin() + static_cast<std::ptrdiff_t>(cell * config.repetitions),
                              revenue.begin() + static_cast<std::ptrdiff_t>((cell + 1) * config.repetitions));
            const auto n = static_cast<double>(c.revenues.size());
            c.mean = std::accumulate(c.revenues.begin(), c.revenues.end(), 0.0) / n;
            if (c.revenues.size() >= 2) {
                double ss = 0;
                for (double v : c.revenues) {
                    ss += (v - c.mean) * (v - c.mean);
                }
                c.sd = std::sqrt(ss / (n - 1));
                const boost::math::students_t dist(n - 1);
                const double half = boost::math::quantile(dist, 0.975) * *c.sd / std::sqrt(n);
                c.ci_low = c.mean - half;
                c.ci_high = c.mean + half;
            }
        }
        table.runs = runs;
        tables.push_back(std::move(table));
    }
    return tables;
}

} // namespace hrm::sim
