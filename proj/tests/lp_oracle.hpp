#pragma once

// Brute-force reference for small LPs: enumerates every basic solution of
// the constraint system (vertices) and every edge direction (extreme rays).
// Shares nothing with the simplex implementation beyond the problem type.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "hrm/lp.hpp"

namespace hrm::testing {

struct OracleResult {
    lp::Status status;
    double objective = 0;
    std::vector<std::vector<double>> vertices;
};

namespace detail {

struct HalfSpace {
    std::vector<double> a;
    double b;
    bool equality;
};

inline std::vector<HalfSpace> half_spaces(const lp::LpProblem& p) {
    const std::size_t n = p.variable_count();
    std::vector<HalfSpace> rows;
    for (const auto& c : p.constraints()) {
        std::vector<double> a(n, 0.0);
        for (const auto& t : c.terms) {
            a[t.var] += t.coef;
        }
        double b = c.rhs;
        if (c.relation == lp::Relation::less_equal) {
            for (double& v : a) {
                v = -v;
            }
            b = -b;
        }
        rows.push_back({std::move(a), b, c.relation == lp::Relation::equal});
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (p.variables()[j].sign == lp::Sign::nonnegative) {
            std::vector<double> a(n, 0.0);
            a[j] = 1.0;
            rows.push_back({std::move(a), 0.0, false});
        }
    }
    return rows;
}

/// Solves the square system by Gaussian elimination; nullopt when singular.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> m, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) {
                piv = r;
            }
        }
        if (std::abs(m[piv][col]) < 1e-9) {
            return std::nullopt;
        }
        std::swap(m[piv], m[col]);
        std::swap(rhs[piv], rhs[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) {
                continue;
            }
            const double f = m[r][col] / m[col][col];
            for (std::size_t k = col; k < n; ++k) {
                m[r][k] -= f * m[col][k];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rhs[i] / m[i][i];
    }
    return x;
}

inline std::size_t rank(std::vector<std::vector<double>> m) {
    if (m.empty()) {
        return 0;
    }
    const std::size_t cols = m.front().size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < m.size(); ++c) {
        std::size_t piv = r;
        for (std::size_t i = r + 1; i < m.size(); ++i) {
            if (std::abs(m[i][c]) > std::abs(m[piv][c])) {
                piv = i;
            }
        }
        if (std::abs(m[piv][c]) < 1e-9) {
            continue;
        }
        std::swap(m[piv], m[r]);
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (i == r) {
                continue;
            }
            const double f = m[i][c] / m[r][c];
            for (std::size_t k = c; k < cols; ++k) {
                m[i][k] -= f * m[r][k];
            }
        }
        ++r;
    }
    return r;
}

template <class F>
void for_each_subset(std::size_t total, std::size_t k, F&& f) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) {
        idx[i] = i;
    }
    if (k > total) {
        return;
    }
    while (true) {
        f(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == total - k + i - 1) {
            --i;
        }
        if (i == 0) {
            return;
        }
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

inline double dot(const std::vector<double>& a, const std::vector<double>& x) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * x[i];
    }
    return s;
}

} // namespace detail

/// True when the constraint rows (sign restrictions included) have full
/// column rank, i.e. the feasible polyhedron contains no line.
inline bool is_pointed(const lp::LpProblem& p) {
    std::vector<std::vector<double>> m;
    for (auto& h : detail::half_spaces(p)) {
        m.push_back(h.a);
    }
    return detail::rank(m) == p.variable_count();
}

/// Requires a pointed feasible region (see is_pointed).
inline OracleResult enumerate_vertices(const lp::LpProblem& p, double feas_tol = 1e-7) {
    using namespace detail;
    const std::size_t n = p.variable_count();
    const auto rows = half_spaces(p);
    const auto& c = p.objective();
    OracleResult res{lp::Status::infeasible, std::numeric_limits<double>::infinity(), {}};

    auto feasible_point = [&](const std::vector<double>& x) {
        for (const auto& h : rows) {
            const double s = std::max(1.0, *std::max_element(h.a.begin(), h.a.end(), [](double u, double v) {
                return std::abs(u) < std::abs(v);
            }));
            const double lhs = dot(h.a, x);
            if (h.equality ? std::abs(lhs - h.b) > feas_tol * s : lhs < h.b - feas_tol * std::abs(s)) {
                return false;
            }
        }
        return true;
    };

    for_each_subset(rows.size(), n, [&](const std::vector<std::size_t>& idx) {
        std::vector<std::vector<double>> m;
        std::vector<double> b;
        for (std::size_t i : idx) {
            m.push_back(rows[i].a);
            b.push_back(rows[i].b);
        }
        auto x = solve_square(m, b);
        if (!x || !feasible_point(*x)) {
            return;
        }
        res.vertices.push_back(*x);
        const double z = dot(c, *x);
        if (z < res.objective) {
            res.objective = z;
        }
    });
    if (res.vertices.empty()) {
        return res;
    }
    res.status = lp::Status::optimal;

    // extreme rays: one-dimensional null spaces of n-1 independent rows
    bool unbounded = false;
    if (n == 1) {
        for (double sgn : {1.0, -1.0}) {
            bool ok = true;
            for (const auto& h : rows) {
                const double ad = h.a[0] * sgn;
                if (h.equality ? std::abs(ad) > 1e-9 : ad < -1e-9) {
                    ok = false;
                }
            }
            if (ok && c[0] * sgn < -1e-9) {
                unbounded = true;
            }
        }
    } else {
        for_each_subset(rows.size(), n - 1, [&](const std::vector<std::size_t>& idx) {
            if (unbounded) {
                return;
            }
            // complete with each unit row to find the null direction
            for (std::size_t e = 0; e < n; ++e) {
                std::vector<std::vector<double>> m;
                std::vector<double> b(n, 0.0);
                for (std::size_t i : idx) {
                    m.push_back(rows[i].a);
                }
                std::vector<double> unit(n, 0.0);
                unit[e] = 1.0;
                m.push_back(unit);
                b[n - 1] = 1.0;
                auto d = solve_square(m, b);
                if (!d) {
                    continue;
                }
                for (double sgn : {1.0, -1.0}) {
                    bool ok = true;
                    for (const auto& h : rows) {
                        const double ad = dot(h.a, *d) * sgn;
                        if (h.equality ? std::abs(ad) > 1e-9 : ad < -1e-9) {
                            ok = false;
                            break;
                        }
                    }
                    if (ok && dot(c, *d) * sgn < -1e-9) {
                        unbounded = true;
                    }
                }
                break;
            }
        });
    }
    if (unbounded) {
        res.status = lp::Status::unbounded;
    }
    return res;
}

/// Random small LP with integer data, regenerated until pointed.
inline lp::LpProblem random_small_lp(std::mt19937_64& rng, bool add_bounding_row) {
    std::uniform_int_distribution<int> nvar_d(1, 6);
    std::uniform_int_distribution<int> coef(-5, 5);
    std::uniform_int_distribution<int> rhs_d(-10, 10);
    std::uniform_int_distribution<int> rel_d(0, 5);
    std::bernoulli_distribution free_d(0.2);
    while (true) {
        lp::LpProblem p;
        const int n = nvar_d(rng);
        const int max_rows = add_bounding_row ? 7 : 8;
        const int m = std::uniform_int_distribution<int>(1, max_rows)(rng);
        for (int j = 0; j < n; ++j) {
            p.add_variable("x" + std::to_string(j), free_d(rng) ? lp::Sign::free : lp::Sign::nonnegative);
            p.add_objective(static_cast<lp::VarId>(j), coef(rng));
        }
        for (int i = 0; i < m; ++i) {
            std::vector<lp::Term> terms;
            for (int j = 0; j < n; ++j) {
                const int a = coef(rng);
                if (a != 0) {
                    terms.push_back({static_cast<lp::VarId>(j), static_cast<double>(a)});
                }
            }
            const int r = rel_d(rng);
            const auto rel = r < 3 ? lp::Relation::less_equal
                                   : (r < 5 ? lp::Relation::greater_equal : lp::Relation::equal);
            p.add_constraint(std::move(terms), rel, rhs_d(rng));
        }
        if (add_bounding_row) {
            // bounds the region whenever every variable is sign-restricted
            std::vector<lp::Term> all;
            for (int j = 0; j < n; ++j) {
                all.push_back({static_cast<lp::VarId>(j), 1.0});
            }
            p.add_constraint(std::move(all), lp::Relation::less_equal, 20.0);
        }
        if (is_pointed(p)) {
            return p;
        }
    }
}

} // namespace hrm::testing
