#include "hrm/spline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace hrm::spline {

double CubicPiece::value(double x) const {
    const double u = x - x0;
    return a + u * (b + u * (c + u * d));
}

double CubicPiece::slope(double x) const {
    const double u = x - x0;
    return b + u * (2 * c + 3 * d * u);
}

double CubicPiece::curvature(double x) const {
    return 2 * c + 6 * d * (x - x0);
}

namespace {

std::size_t piece_index(const std::vector<double>& knots, double x) {
    // piece k owns [x_k, x_{k+1}); the last knot belongs to the final piece
    const auto it = std::upper_bound(knots.begin(), knots.end(), x);
    const auto k = static_cast<std::size_t>(std::distance(knots.begin(), it));
    if (k == 0) {
        return 0;
    }
    return std::min(k - 1, knots.size() - 2);
}

double knot_value(const RateCurve& curve, std::size_t k) {
    if (k < curve.pieces.size()) {
        return curve.pieces[k].a;
    }
    const auto& last = curve.pieces.back();
    return last.value(last.x1);
}

} // namespace

double RateCurveSet::raw_value(std::size_t rate, double x) const {
    const auto& curve = curves.at(rate);
    return curve.pieces[piece_index(knots, x)].value(x);
}

DegenerateRateError::DegenerateRateError(std::size_t r, std::size_t distinct_days)
    : FitError("rate class " + std::to_string(r) + " has " + std::to_string(distinct_days) +
               " distinct observed horizon days; at least 3 are needed"),
      rate(r) {}

std::size_t count_decision_vars(std::size_t knots, std::size_t rates) {
    if (knots < 3) {
        throw FitError("at least 3 knots are needed, got " + std::to_string(knots));
    }
    if (rates < 1) {
        throw FitError("at least one rate class is needed");
    }
    return (4 * (knots - 1) + knots + (knots - 2)) * 2 * rates;
}

std::size_t FitProgram::included_rate_count() const {
    return static_cast<std::size_t>(std::count_if(blocks.begin(), blocks.end(), [](const RateBlock& b) {
        return !b.excluded;
    }));
}

Observations collect_observations(std::span<const DemandScenario> scenarios, const FitOptions& options) {
    if (scenarios.empty()) {
        throw FitError("no demand scenarios to fit");
    }
    const std::size_t rates = scenarios.front().rate_count();
    const int horizon = scenarios.front().horizon();
    for (const auto& s : scenarios) {
        if (s.rate_count() != rates || s.horizon() != horizon) {
            throw FitError("demand scenarios disagree on rate classes or horizon length");
        }
        if (!s.cumulated) {
            throw FitError("scenario for " + format_date(s.checkin) + " is not in choice-set form");
        }
    }
    const int first = options.first_day > 0 ? options.first_day : 1;
    const int last = options.last_day > 0 ? options.last_day : horizon;
    if (first < 1 || last > horizon || last < first) {
        throw FitError("fit window [" + std::to_string(first) + ", " + std::to_string(last) +
                       "] is outside the horizon");
    }

    std::map<int, std::vector<std::vector<double>>> by_day;
    for (int t = first; t <= last; ++t) {
        std::vector<std::vector<double>> per_rate(rates);
        bool any = false;
        for (std::size_t r = 0; r < rates; ++r) {
            if (!options.exclude.empty() && options.exclude[r]) {
                continue;
            }
            for (const auto& s : scenarios) {
                if (!s.is_observed(r, t)) {
                    continue;
                }
                const double y = s.at(r, t);
                per_rate[r].push_back(options.anscombe ? std::sqrt(y) : y);
                any = true;
            }
        }
        if (any) {
            by_day.emplace(t, std::move(per_rate));
        }
    }

    Observations obs;
    obs.values.assign(rates, {});
    for (auto& [t, per_rate] : by_day) {
        obs.knots.push_back(t);
        for (std::size_t r = 0; r < rates; ++r) {
            obs.values[r].push_back(std::move(per_rate[r]));
        }
    }
    return obs;
}

FitProgram build_fit_program(std::span<const DemandScenario> scenarios, const RateLadder& ladder,
                             const FitOptions& options) {
    if (!scenarios.empty() && scenarios.front().rate_count() != ladder.size()) {
        throw FitError("scenario rate classes do not match the ladder");
    }
    return build_fit_program(collect_observations(scenarios, options), ladder.rates(), options);
}

namespace {

using lp::Relation;
using lp::Term;

struct Expr {
    std::vector<Term> terms;

    Expr& add(const Expr& other, double f) {
        for (const auto& t : other.terms) {
            terms.push_back({t.var, t.coef * f});
        }
        return *this;
    }
    std::vector<Term> negated() const {
        std::vector<Term> out = terms;
        for (auto& t : out) {
            t.coef = -t.coef;
        }
        return out;
    }
};

} // namespace

FitProgram build_fit_program(const Observations& obs, const std::vector<Money>& rates, const FitOptions& options) {
    const std::size_t nrates = rates.size();
    if (options.smoothing.size() != nrates) {
        throw FitError("need one smoothing parameter per rate class (" + std::to_string(nrates) + "), got " +
                       std::to_string(options.smoothing.size()));
    }
    for (std::size_t r = 0; r < nrates; ++r) {
        const double g = options.smoothing[r];
        if (!(g >= 0.0 && g <= 1.0)) {
            throw FitError("smoothing for rate class " + std::to_string(r) + " must lie in [0, 1]");
        }
    }
    auto excluded = [&](std::size_t r) { return !options.exclude.empty() && options.exclude[r]; };

    const std::size_t n = obs.knots.size();
    double scale = 0;
    for (std::size_t r = 0; r < nrates; ++r) {
        if (excluded(r)) {
            continue;
        }
        std::size_t days = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const auto& ys = obs.values[r][k];
            if (ys.empty()) {
                continue;
            }
            ++days;
            double sum = 0;
            for (double y : ys) {
                sum += y;
            }
            scale = std::max(scale, sum / static_cast<double>(ys.size()));
        }
        if (days < 3) {
            throw DegenerateRateError(r, days);
        }
    }

    FitProgram prog;
    prog.knots = obs.knots;
    prog.rates = rates;
    prog.smoothing = options.smoothing;
    prog.anscombe = options.anscombe;
    prog.scale = scale > 0 ? scale : 1.0;
    prog.blocks.resize(nrates);
    auto& lp = prog.problem;
    const auto& x = prog.knots;

    std::vector<std::vector<Expr>> knot_expr(nrates);

    for (std::size_t r = 0; r < nrates; ++r) {
        auto& blk = prog.blocks[r];
        if (excluded(r)) {
            blk.excluded = true;
            continue;
        }
        const std::string tag = std::to_string(r);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (const char* c : {"a", "b", "c", "d"}) {
                blk.coef.push_back(lp.add_variable(std::string(c) + tag + "_" + std::to_string(i), lp::Sign::free));
            }
        }
        auto coef = [&](std::size_t piece, int which) { return blk.coef[4 * piece + static_cast<std::size_t>(which)]; };
        auto right_value = [&](std::size_t i) {
            const double h = x[i + 1] - x[i];
            return Expr{{{coef(i, 0), 1.0}, {coef(i, 1), h}, {coef(i, 2), h * h}, {coef(i, 3), h * h * h}}};
        };
        auto right_slope = [&](std::size_t i) {
            const double h = x[i + 1] - x[i];
            return Expr{{{coef(i, 1), 1.0}, {coef(i, 2), 2 * h}, {coef(i, 3), 3 * h * h}}};
        };
        auto right_curv = [&](std::size_t i) {
            const double h = x[i + 1] - x[i];
            return Expr{{{coef(i, 2), 2.0}, {coef(i, 3), 6 * h}}};
        };

        auto& S = knot_expr[r];
        for (std::size_t k = 0; k + 1 < n; ++k) {
            S.push_back(Expr{{{coef(k, 0), 1.0}}});
        }
        S.push_back(right_value(n - 2));

        // error pairs against the per-knot target
        double inv_sum = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (!obs.values[r][k].empty()) {
                inv_sum += 1.0 / static_cast<double>(obs.values[r][k].size());
            }
        }
        const double g = options.smoothing[r];
        for (std::size_t k = 0; k < n; ++k) {
            const auto& ys = obs.values[r][k];
            if (ys.empty()) {
                continue;
            }
            double sum = 0;
            for (double y : ys) {
                sum += y;
            }
            const double target = sum / static_cast<double>(ys.size()) / prog.scale;
            const double w = (1.0 / static_cast<double>(ys.size())) / inv_sum;
            const auto e = lp.add_variable("e" + tag + "_" + std::to_string(k));
            lp.add_objective(e, (1.0 - g) * w);
            // e >= S - y   and   e >= -(S - y)
            Expr up = S[k];
            up.terms.push_back({e, -1.0});
            lp.add_constraint(up.terms, Relation::less_equal, target);
            Expr down{S[k].negated()};
            down.terms.push_back({e, -1.0});
            lp.add_constraint(down.terms, Relation::less_equal, -target);
            blk.error.push_back(e);
            blk.error_knot.push_back(k);
            blk.target.push_back(target);
            blk.weight.push_back(w);
        }

        // second differences S_{k-2} - 2 S_{k-1} + S_k
        for (std::size_t k = 2; k < n; ++k) {
            const auto dv = lp.add_variable("d2" + tag + "_" + std::to_string(k));
            lp.add_objective(dv, g);
            Expr diff;
            diff.add(S[k - 2], 1.0).add(S[k - 1], -2.0).add(S[k], 1.0);
            Expr up = diff;
            up.terms.push_back({dv, -1.0});
            lp.add_constraint(up.terms, Relation::less_equal, 0.0);
            Expr down{diff.negated()};
            down.terms.push_back({dv, -1.0});
            lp.add_constraint(down.terms, Relation::less_equal, 0.0);
            blk.second_diff.push_back(dv);
        }

        // C0/C1/C2 continuity at interior knots
        for (std::size_t i = 0; i + 2 < n; ++i) {
            Expr c0 = right_value(i);
            c0.terms.push_back({coef(i + 1, 0), -1.0});
            lp.add_constraint(c0.terms, Relation::equal, 0.0);
            Expr c1 = right_slope(i);
            c1.terms.push_back({coef(i + 1, 1), -1.0});
            lp.add_constraint(c1.terms, Relation::equal, 0.0);
            Expr c2 = right_curv(i);
            c2.terms.push_back({coef(i + 1, 2), -2.0});
            lp.add_constraint(c2.terms, Relation::equal, 0.0);
        }

        // zero slope at both ends
        lp.add_constraint({{coef(0, 1), 1.0}}, Relation::equal, 0.0);
        lp.add_constraint(right_slope(n - 2).terms, Relation::equal, 0.0);

        for (std::size_t k = 0; k < n; ++k) {
            lp.add_constraint(S[k].terms, Relation::greater_equal, 0.0);
        }
    }

    // choice-set ordering at knots: cheaper rate carries at least the demand of the next
    std::size_t prev = nrates;
    for (std::size_t r = 0; r < nrates; ++r) {
        if (excluded(r)) {
            continue;
        }
        if (prev < nrates) {
            for (std::size_t k = 0; k < n; ++k) {
                Expr diff;
                diff.add(knot_expr[prev][k], 1.0).add(knot_expr[r][k], -1.0);
                lp.add_constraint(diff.terms, Relation::greater_equal, 0.0);
            }
        }
        prev = r;
    }
    return prog;
}

FitResult fit_curves(const FitProgram& program, const lp::Tolerances& tol) {
    const auto sol = lp::solve(program.problem, tol);
    if (sol.status != lp::Status::optimal) {
        // the zero curve is always feasible for nonnegative data
        throw FitError("internal error: spline program solved as " + lp::to_string(sol.status));
    }

    FitResult res;
    auto& cs = res.curves;
    cs.knots = program.knots;
    cs.rates = program.rates;
    cs.anscombe = program.anscombe;
    cs.curves.resize(program.blocks.size());
    const std::size_t n = program.knots.size();
    for (std::size_t r = 0; r < program.blocks.size(); ++r) {
        const auto& blk = program.blocks[r];
        auto& curve = cs.curves[r];
        curve.smoothing = program.smoothing[r];
        curve.excluded = blk.excluded;
        if (blk.excluded) {
            continue;
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            CubicPiece p;
            p.a = sol[blk.coef[4 * i]] * program.scale;
            p.b = sol[blk.coef[4 * i + 1]] * program.scale;
            p.c = sol[blk.coef[4 * i + 2]] * program.scale;
            p.d = sol[blk.coef[4 * i + 3]] * program.scale;
            p.x0 = program.knots[i];
            p.x1 = program.knots[i + 1];
            curve.pieces.push_back(p);
        }
    }

    auto& diag = res.diagnostics;
    diag.objective = sol.objective * program.scale;
    diag.variables = program.problem.variable_count();
    diag.constraints = program.problem.constraint_count();
    diag.iterations = sol.iterations;
    diag.weighted_error.assign(program.blocks.size(), 0.0);
    diag.curvature.assign(program.blocks.size(), 0.0);
    for (std::size_t r = 0; r < program.blocks.size(); ++r) {
        const auto& blk = program.blocks[r];
        if (blk.excluded) {
            continue;
        }
        for (std::size_t j = 0; j < blk.error.size(); ++j) {
            diag.weighted_error[r] +=
                blk.weight[j] * std::abs(knot_value(cs.curves[r], blk.error_knot[j]) - blk.target[j] * program.scale);
        }
        for (std::size_t k = 2; k < n; ++k) {
            diag.curvature[r] += std::abs(knot_value(cs.curves[r], k - 2) - 2 * knot_value(cs.curves[r], k - 1) +
                                          knot_value(cs.curves[r], k));
        }
    }

    std::size_t prev = cs.rate_count();
    for (std::size_t r = 0; r < cs.rate_count(); ++r) {
        if (!cs.has_curve(r)) {
            continue;
        }
        if (prev < cs.rate_count()) {
            for (std::size_t i = 0; i + 1 < n; ++i) {
                for (int s = 1; s < 8; ++s) {
                    const double xs = cs.knots[i] + (cs.knots[i + 1] - cs.knots[i]) * s / 8.0;
                    diag.between_knot_ordering_gap = std::max(
                        diag.between_knot_ordering_gap,
                        cs.curves[r].pieces[i].value(xs) - cs.curves[prev].pieces[i].value(xs));
                }
            }
        }
        prev = r;
    }
    return res;
}

double evaluate_curve(const RateCurveSet& curves, std::size_t rate, double x) {
    if (!curves.has_curve(rate)) {
        throw FitError("rate class " + std::to_string(rate) + " has no fitted curve");
    }
    const double eps = 1e-9 * std::max(1.0, std::abs(curves.last_knot()));
    if (!(x >= curves.first_knot() - eps && x <= curves.last_knot() + eps)) {
        throw FitError("x = " + std::to_string(x) + " is outside the fitted range [" +
                       std::to_string(curves.first_knot()) + ", " + std::to_string(curves.last_knot()) + "]");
    }
    const double v = std::max(0.0, curves.raw_value(rate, x));
    return curves.anscombe ? v * v : v;
}

CurveChecks check_curves(const RateCurveSet& curves) {
    CurveChecks out;
    const std::size_t n = curves.knots.size();
    double top = 0;
    out.min_knot_value = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < curves.rate_count(); ++r) {
        if (!curves.has_curve(r)) {
            continue;
        }
        for (std::size_t k = 0; k < n; ++k) {
            const double v = knot_value(curves.curves[r], k);
            top = std::max(top, std::abs(v));
            out.min_knot_value = std::min(out.min_knot_value, v);
        }
    }
    const double norm = top > 0 ? top : 1.0;
    std::size_t prev = curves.rate_count();
    for (std::size_t r = 0; r < curves.rate_count(); ++r) {
        if (!curves.has_curve(r)) {
            continue;
        }
        const auto& p = curves.curves[r].pieces;
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            const double xk = p[i].x1;
            out.c0 = std::max(out.c0, std::abs(p[i].value(xk) - p[i + 1].value(xk)) / norm);
            out.c1 = std::max(out.c1, std::abs(p[i].slope(xk) - p[i + 1].slope(xk)) / norm);
            out.c2 = std::max(out.c2, std::abs(p[i].curvature(xk) - p[i + 1].curvature(xk)) / norm);
        }
        out.endpoint_slope = std::max(out.endpoint_slope, std::abs(p.front().slope(p.front().x0)) / norm);
        out.endpoint_slope = std::max(out.endpoint_slope, std::abs(p.back().slope(p.back().x1)) / norm);
        if (prev < curves.rate_count()) {
            for (std::size_t k = 0; k < n; ++k) {
                out.ordering_gap =
                    std::max(out.ordering_gap, knot_value(curves.curves[r], k) - knot_value(curves.curves[prev], k));
            }
        }
        prev = r;
    }
    if (out.min_knot_value == std::numeric_limits<double>::infinity()) {
        out.min_knot_value = 0;
    }
    return out;
}

double recompute_objective(const FitProgram& program, const RateCurveSet& curves) {
    double total = 0;
    const std::size_t n = program.knots.size();
    for (std::size_t r = 0; r < program.blocks.size(); ++r) {
        const auto& blk = program.blocks[r];
        if (blk.excluded) {
            continue;
        }
        const double g = program.smoothing[r];
        double err = 0;
        for (std::size_t j = 0; j < blk.error.size(); ++j) {
            err += blk.weight[j] *
                   std::abs(knot_value(curves.curves[r], blk.error_knot[j]) - blk.target[j] * program.scale);
        }
        double curv = 0;
        for (std::size_t k = 2; k < n; ++k) {
            curv += std::abs(knot_value(curves.curves[r], k - 2) - 2 * knot_value(curves.curves[r], k - 1) +
                             knot_value(curves.curves[r], k));
        }
        total += (1 - g) * err + g * curv;
    }
    return total;
}

} // namespace hrm::spline
