#pragma once

// Brute-force references for the pricing recursion, test use only.

#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "hrm/dp.hpp"

namespace hrm::testing {

/// Best expected revenue over every contingent decision tree: at each
/// point of the booking history (which intervals sold) any price may be
/// posted. The tree is walked path by path; no state is merged.
inline double best_decision_tree(const dp::ArrivalRates& r, std::size_t t, std::vector<bool>& history,
                                 int capacity) {
    int sold = 0;
    for (bool b : history) {
        sold += b ? 1 : 0;
    }
    if (t == r.interval_count() || sold == capacity) {
        return 0.0;
    }
    double best = 0.0;
    bool first = true;
    for (std::size_t j = 0; j < r.price_count(); ++j) {
        const double l = r.lambda[j][t];
        history.push_back(true);
        const double if_sold = r.prices[j] + best_decision_tree(r, t + 1, history, capacity);
        history.back() = false;
        const double if_not = best_decision_tree(r, t + 1, history, capacity);
        history.pop_back();
        const double v = l * if_sold + (1 - l) * if_not;
        if (first || v > best) {
            best = v;
            first = false;
        }
    }
    return best;
}

inline double best_decision_tree(const dp::ArrivalRates& r, int capacity) {
    std::vector<bool> history;
    return best_decision_tree(r, 0, history, capacity);
}

/// Expected revenue of one fixed price sequence, summed over all 2^T
/// booking outcome sequences.
inline double fixed_sequence_value(const dp::ArrivalRates& r, const std::vector<std::size_t>& seq, int capacity) {
    const std::size_t n = r.interval_count();
    double total = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        double p = 1.0;
        double revenue = 0.0;
        int left = capacity;
        for (std::size_t t = 0; t < n; ++t) {
            const bool arrival = (mask >> t) & 1u;
            const double l = r.lambda[seq[t]][t];
            if (left == 0) {
                // sold out: the outcome no longer matters, count it once
                if (arrival) {
                    p = 0.0;
                    break;
                }
                continue;
            }
            p *= arrival ? l : 1 - l;
            if (arrival) {
                revenue += r.prices[seq[t]];
                --left;
            }
        }
        total += p * revenue;
    }
    return total;
}

/// Best of all |R|^T fixed price sequences.
inline double best_fixed_sequence(const dp::ArrivalRates& r, int capacity) {
    const std::size_t n = r.interval_count();
    const std::size_t R = r.price_count();
    std::vector<std::size_t> seq(n, 0);
    double best = 0.0;
    while (true) {
        best = std::max(best, fixed_sequence_value(r, seq, capacity));
        std::size_t i = 0;
        while (i < n && ++seq[i] == R) {
            seq[i++] = 0;
        }
        if (i == n) {
            break;
        }
    }
    return best;
}

/// Random table with lambda nondecreasing as the price falls.
inline dp::ArrivalRates random_rates(std::mt19937_64& rng, std::size_t intervals, std::size_t prices) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    dp::ArrivalRates r;
    for (std::size_t j = 0; j < prices; ++j) {
        r.prices.push_back(100.0 * static_cast<double>(prices - j) + 10.0 * u(rng));
    }
    r.lambda.assign(prices, std::vector<double>(intervals));
    for (std::size_t t = 0; t < intervals; ++t) {
        double l = 0.0;
        for (std::size_t j = 0; j < prices; ++j) {
            l = std::min(0.99, l + 0.5 * u(rng));
            r.lambda[j][t] = l;
        }
        r.day_of_interval.push_back(static_cast<int>(t) + 1);
    }
    return r;
}

} // namespace hrm::testing
