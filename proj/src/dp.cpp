#include "hrm/dp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hrm::dp {

ArrivalRates refine_time_grid(const DailyDemand& demand, const std::vector<Money>& ascending_prices,
                              int first_day, int last_day, int subdivisions) {
    if (subdivisions < 1) {
        throw DpError("subdivisions per day must be at least 1");
    }
    if (last_day < first_day) {
        throw DpError("empty day range");
    }
    const std::size_t nprices = ascending_prices.size();
    const auto ndays = static_cast<std::size_t>(last_day - first_day + 1);

    // daily[r][day] on ascending price index
    std::vector<std::vector<double>> daily(nprices, std::vector<double>(ndays));
    double peak = 0;
    for (std::size_t r = 0; r < nprices; ++r) {
        for (std::size_t d = 0; d < ndays; ++d) {
            const double v = demand(r, first_day + static_cast<int>(d));
            if (!(v >= 0) || !std::isfinite(v)) {
                throw DpError("internal error: negative or non-finite demand rate for class " + std::to_string(r));
            }
            daily[r][d] = v;
            peak = std::max(peak, v);
        }
    }
    while (peak / subdivisions >= 1.0) {
        subdivisions *= 2;
    }

    ArrivalRates out;
    out.subdivisions = subdivisions;
    out.prices.assign(ascending_prices.rbegin(), ascending_prices.rend());
    out.lambda.assign(nprices, {});
    for (std::size_t d = 0; d < ndays; ++d) {
        for (int s = 0; s < subdivisions; ++s) {
            out.day_of_interval.push_back(first_day + static_cast<int>(d));
        }
    }
    for (std::size_t j = 0; j < nprices; ++j) {
        const auto& src = daily[nprices - 1 - j];
        auto& dst = out.lambda[j];
        dst.reserve(out.day_of_interval.size());
        for (std::size_t d = 0; d < ndays; ++d) {
            for (int s = 0; s < subdivisions; ++s) {
                dst.push_back(src[d] / subdivisions);
            }
        }
    }
    return out;
}

ArrivalRates refine_time_grid(const spline::RateCurveSet& curves, int subdivisions) {
    const int first = static_cast<int>(std::ceil(curves.first_knot()));
    const int last = static_cast<int>(std::floor(curves.last_knot()));
    return refine_time_grid(
        [&](std::size_t r, int day) {
            return curves.has_curve(r) ? spline::evaluate_curve(curves, r, day) : 0.0;
        },
        curves.rates, first, last, subdivisions);
}

DpSolution solve_dp(const ArrivalRates& rates, int capacity) {
    if (capacity < 0) {
        throw DpError("capacity must be nonnegative");
    }
    const std::size_t n = rates.interval_count();
    const auto cap = static_cast<std::size_t>(capacity);
    const std::size_t nprices = rates.price_count();
    if (nprices == 0) {
        throw DpError("no prices to choose from");
    }
    for (const auto& row : rates.lambda) {
        if (row.size() != n) {
            throw DpError("arrival table rows disagree with the interval count");
        }
        for (double l : row) {
            if (!(l >= 0.0 && l < 1.0)) {
                throw DpError("interval booking probabilities must lie in [0, 1)");
            }
        }
    }

    DpSolution sol;
    auto& V = sol.values.v;
    V.assign(n + 1, std::vector<double>(cap + 1, 0.0));
    sol.policy.choice.assign(n + 1, std::vector<int>(cap + 1, -1));

    for (std::size_t t = n; t-- > 0;) {
        const auto& next = V[t + 1];
        for (std::size_t x = 1; x <= cap; ++x) {
            double best = -1.0;
            int arg = -1;
            // prices descend with j, so a strict > keeps the highest price on ties
            for (std::size_t j = 0; j < nprices; ++j) {
                const double l = rates.lambda[j][t];
                const double v = l * (rates.prices[j] + next[x - 1]) + (1.0 - l) * next[x];
                if (v > best) {
                    best = v;
                    arg = static_cast<int>(j);
                }
            }
            V[t][x] = best;
            sol.policy.choice[t][x] = arg;
        }
    }
    sol.expected_revenue = V[0][cap];
    return sol;
}

double evaluate_policy(const ArrivalRates& rates, int capacity,
                       const std::function<int(std::size_t interval, int remaining)>& choose) {
    if (capacity < 0) {
        throw DpError("capacity must be nonnegative");
    }
    const std::size_t n = rates.interval_count();
    const auto cap = static_cast<std::size_t>(capacity);
    std::vector<double> next(cap + 1, 0.0);
    std::vector<double> cur(cap + 1, 0.0);
    for (std::size_t t = n; t-- > 0;) {
        cur[0] = 0.0;
        for (std::size_t x = 1; x <= cap; ++x) {
            const int j = choose(t, static_cast<int>(x));
            if (j < 0 || static_cast<std::size_t>(j) >= rates.price_count()) {
                throw DpError("policy chose an unknown price index " + std::to_string(j));
            }
            const double l = rates.lambda[static_cast<std::size_t>(j)][t];
            cur[x] = l * (rates.prices[static_cast<std::size_t>(j)] + next[x - 1]) + (1.0 - l) * next[x];
        }
        std::swap(cur, next);
    }
    return next[cap];
}

ArrivalSequence sample_arrivals(const ArrivalRates& rates, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    ArrivalSequence seq(rates.interval_count());
    for (std::size_t t = 0; t < seq.size(); ++t) {
        const double u = unif(rng);
        // prices descend: the highest price whose acceptance probability exceeds u
        for (std::size_t j = 0; j < rates.price_count(); ++j) {
            if (u < rates.lambda[j][t]) {
                seq[t] = rates.prices[j];
                break;
            }
        }
    }
    return seq;
}

Money policy_revenue_on_scenario(const RatePolicy& policy, const ArrivalSequence& arrivals,
                                 const std::vector<Money>& prices, int capacity) {
    if (policy.choice.size() != arrivals.size() + 1) {
        throw DpError("arrival sequence has " + std::to_string(arrivals.size()) + " intervals, policy has " +
                      std::to_string(policy.choice.size() - 1));
    }
    int left = std::min(capacity, static_cast<int>(policy.choice.front().size()) - 1);
    Money revenue = 0;
    for (std::size_t t = 0; t < arrivals.size() && left > 0; ++t) {
        if (!arrivals[t]) {
            continue;
        }
        const int j = policy(t, static_cast<std::size_t>(left));
        const Money posted = prices[static_cast<std::size_t>(j)];
        if (*arrivals[t] >= posted) {
            revenue += posted;
            --left;
        }
    }
    return revenue;
}

} // namespace hrm::dp
