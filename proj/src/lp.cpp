#include "hrm/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hrm::lp {

std::string to_string(Status s) {
    switch (s) {
    case Status::optimal:
        return "optimal";
    case Status::infeasible:
        return "infeasible";
    case Status::unbounded:
        return "unbounded";
    }
    return "unknown";
}

VarId LpProblem::add_variable(std::string name, Sign sign) {
    vars_.push_back({std::move(name), sign});
    cost_.push_back(0.0);
    return vars_.size() - 1;
}

void LpProblem::add_objective(VarId var, double coef) {
    if (var >= vars_.size()) {
        throw LpError("objective references undeclared variable " + std::to_string(var));
    }
    cost_[var] += coef;
}

void LpProblem::add_constraint(std::vector<Term> terms, Relation rel, double rhs, std::string name) {
    rows_.push_back({std::move(terms), rel, rhs, std::move(name)});
}

void LpProblem::validate() const {
    for (double c : cost_) {
        if (!std::isfinite(c)) {
            throw LpError("non-finite objective coefficient");
        }
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto& row = rows_[i];
        if (!std::isfinite(row.rhs)) {
            throw LpError("non-finite right-hand side in constraint " + std::to_string(i));
        }
        for (const auto& t : row.terms) {
            if (t.var >= vars_.size()) {
                throw LpError("constraint " + std::to_string(i) + " references undeclared variable " +
                              std::to_string(t.var));
            }
            if (!std::isfinite(t.coef)) {
                throw LpError("non-finite coefficient in constraint " + std::to_string(i));
            }
        }
    }
}

namespace {

std::vector<double> dense_row(const Constraint& row, std::size_t n) {
    std::vector<double> a(n, 0.0);
    for (const auto& t : row.terms) {
        a[t.var] += t.coef;
    }
    return a;
}

double row_scale(const std::vector<double>& a) {
    double s = 0;
    for (double v : a) {
        s = std::max(s, std::abs(v));
    }
    return s;
}

/// Dense two-phase tableau simplex. Free columns are never split: a free
/// nonbasic column may enter in either direction (by negating it) and a row
/// whose basic variable is free never blocks a ratio test.
class Tableau {
public:
    Tableau(const LpProblem& p, const Tolerances& tol) : tol_(tol), nvar_(p.variable_count()) {
        struct Row {
            std::vector<double> a;
            Relation rel;
            double rhs;
        };
        std::vector<Row> rows;
        rows.reserve(p.constraint_count());
        for (const auto& c : p.constraints()) {
            auto a = dense_row(c, nvar_);
            double rhs = c.rhs;
            const double s = row_scale(a);
            if (s == 0.0) {
                const bool ok = (c.relation == Relation::less_equal && rhs >= -tol_.feasibility) ||
                                (c.relation == Relation::greater_equal && rhs <= tol_.feasibility) ||
                                (c.relation == Relation::equal && std::abs(rhs) <= tol_.feasibility);
                if (!ok) {
                    trivially_infeasible_ = true;
                }
                continue;
            }
            for (double& v : a) {
                v /= s;
            }
            rhs /= s;
            Relation rel = c.relation;
            if (rhs < 0 || (rhs == 0 && rel == Relation::greater_equal)) {
                for (double& v : a) {
                    v = -v;
                }
                rhs = -rhs;
                if (rel == Relation::less_equal) {
                    rel = Relation::greater_equal;
                } else if (rel == Relation::greater_equal) {
                    rel = Relation::less_equal;
                }
            }
            rows.push_back({std::move(a), rel, rhs});
        }

        m_ = rows.size();
        std::size_t slacks = 0;
        std::size_t artificials = 0;
        for (const auto& r : rows) {
            if (r.rel != Relation::equal) {
                ++slacks;
            }
            if (r.rel != Relation::less_equal) {
                ++artificials;
            }
        }
        n_ = nvar_ + slacks + artificials;
        first_artificial_ = nvar_ + slacks;
        t_.assign(m_ * n_, 0.0);
        b_.assign(m_, 0.0);
        basis_.assign(m_, 0);
        free_.assign(n_, false);
        negated_.assign(n_, false);
        for (std::size_t j = 0; j < nvar_; ++j) {
            free_[j] = p.variables()[j].sign == Sign::free;
        }

        std::size_t next_slack = nvar_;
        std::size_t next_art = first_artificial_;
        for (std::size_t i = 0; i < m_; ++i) {
            const auto& r = rows[i];
            std::copy(r.a.begin(), r.a.end(), t_.begin() + static_cast<std::ptrdiff_t>(i * n_));
            b_[i] = r.rhs;
            switch (r.rel) {
            case Relation::less_equal:
                at(i, next_slack) = 1.0;
                basis_[i] = next_slack++;
                break;
            case Relation::greater_equal:
                at(i, next_slack++) = -1.0;
                at(i, next_art) = 1.0;
                basis_[i] = next_art++;
                break;
            case Relation::equal:
                at(i, next_art) = 1.0;
                basis_[i] = next_art++;
                break;
            }
        }

        cost_.assign(n_, 0.0);
        double cmax = 0;
        for (std::size_t j = 0; j < nvar_; ++j) {
            cmax = std::max(cmax, std::abs(p.objective()[j]));
        }
        cost_scale_ = cmax > 0 ? cmax : 1.0;
        for (std::size_t j = 0; j < nvar_; ++j) {
            cost_[j] = p.objective()[j] / cost_scale_;
        }
    }

    LpSolution run() {
        LpSolution sol;
        if (trivially_infeasible_) {
            sol.status = Status::infeasible;
            return sol;
        }
        if (first_artificial_ < n_) {
            price_phase_one();
            const Status s = iterate(true);
            (void)s; // phase one is bounded below by zero
            if (phase_one_objective() > tol_.feasibility) {
                sol.status = Status::infeasible;
                sol.iterations = iterations_;
                return sol;
            }
            drive_out_artificials();
        }
        price_phase_two();
        sol.status = iterate(false);
        sol.iterations = iterations_;
        sol.values.assign(nvar_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < nvar_) {
                sol.values[basis_[i]] = b_[i];
            }
        }
        for (std::size_t j = 0; j < nvar_; ++j) {
            if (negated_[j]) {
                sol.values[j] = -sol.values[j];
            }
        }
        return sol;
    }

private:
    double& at(std::size_t i, std::size_t j) { return t_[i * n_ + j]; }
    double at(std::size_t i, std::size_t j) const { return t_[i * n_ + j]; }

    bool is_artificial(std::size_t j) const { return j >= first_artificial_; }

    void price_phase_one() {
        d_.assign(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            if (!is_artificial(basis_[i])) {
                continue;
            }
            const double* row = &t_[i * n_];
            for (std::size_t j = 0; j < first_artificial_; ++j) {
                d_[j] -= row[j];
            }
        }
    }

    double phase_one_objective() const {
        double z = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (is_artificial(basis_[i])) {
                z += b_[i];
            }
        }
        return z;
    }

    void price_phase_two() {
        d_.assign(n_, 0.0);
        for (std::size_t j = 0; j < nvar_; ++j) {
            d_[j] = negated_[j] ? -cost_[j] : cost_[j];
        }
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t bj = basis_[i];
            if (bj >= nvar_) {
                continue;
            }
            const double cb = negated_[bj] ? -cost_[bj] : cost_[bj];
            if (cb == 0.0) {
                continue;
            }
            const double* row = &t_[i * n_];
            for (std::size_t j = 0; j < first_artificial_; ++j) {
                d_[j] -= cb * row[j];
            }
        }
        for (std::size_t i = 0; i < m_; ++i) {
            d_[basis_[i]] = 0.0;
        }
    }

    void drive_out_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (!is_artificial(basis_[i])) {
                continue;
            }
            std::size_t best = n_;
            double best_abs = 1e-7;
            for (std::size_t j = 0; j < first_artificial_; ++j) {
                if (in_basis(j)) {
                    continue;
                }
                if (std::abs(at(i, j)) > best_abs) {
                    best_abs = std::abs(at(i, j));
                    best = j;
                }
            }
            if (best < n_) {
                pivot(i, best);
            }
            // otherwise the row is redundant; the artificial stays basic at zero
        }
    }

    bool in_basis(std::size_t j) const {
        return is_basic_.empty() ? std::find(basis_.begin(), basis_.end(), j) != basis_.end() : is_basic_[j];
    }

    void negate_column(std::size_t j) {
        for (std::size_t i = 0; i < m_; ++i) {
            at(i, j) = -at(i, j);
        }
        d_[j] = -d_[j];
        negated_[j] = !negated_[j];
    }

    std::size_t choose_entering(bool phase_one, bool bland) {
        const double opt_tol = 1e-9;
        std::size_t best = n_;
        double best_val = 0;
        const std::size_t limit = first_artificial_;
        for (std::size_t j = 0; j < limit; ++j) {
            if (is_basic_[j]) {
                continue;
            }
            double dj = d_[j];
            if (free_[j]) {
                dj = -std::abs(dj);
            }
            if (dj < -opt_tol) {
                if (bland) {
                    best = j;
                    break;
                }
                if (-dj > best_val) {
                    best_val = -dj;
                    best = j;
                }
            }
        }
        (void)phase_one;
        if (best < n_ && free_[best] && d_[best] > 0) {
            negate_column(best);
        }
        return best;
    }

    std::size_t choose_leaving(std::size_t q, bool bland, double& step) const {
        // Harris two-pass test: bound the step with bounds relaxed by the
        // feasibility tolerance, then take the largest pivot under that bound.
        double bound = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m_; ++i) {
            const double a = at(i, q);
            if (a > tol_.pivot && !free_[basis_[i]]) {
                bound = std::min(bound, (std::max(b_[i], 0.0) + tol_.feasibility) / a);
            }
        }
        std::size_t best = m_;
        double best_piv = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            const double a = at(i, q);
            if (a <= tol_.pivot || free_[basis_[i]]) {
                continue;
            }
            if (std::max(b_[i], 0.0) / a > bound) {
                continue;
            }
            const bool better = best == m_ || (bland ? basis_[i] < basis_[best] : a > best_piv);
            if (better) {
                best = i;
                best_piv = a;
            }
        }
        step = best == m_ ? std::numeric_limits<double>::infinity() : std::max(b_[best], 0.0) / best_piv;
        return best;
    }

    Status iterate(bool phase_one) {
        is_basic_.assign(n_, false);
        for (std::size_t bj : basis_) {
            is_basic_[bj] = true;
        }
        std::size_t degenerate = 0;
        bool bland = false;
        while (true) {
            if (++iterations_ > tol_.max_iterations) {
                throw LpError("simplex iteration limit reached");
            }
            const std::size_t q = choose_entering(phase_one, bland);
            if (q == n_) {
                return Status::optimal;
            }
            double step = 0;
            const std::size_t r = choose_leaving(q, bland, step);
            if (r == m_) {
                return Status::unbounded;
            }
            if (step <= 1e-12) {
                if (++degenerate > tol_.degenerate_limit) {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            pivot(r, q);
        }
    }

    void pivot(std::size_t r, std::size_t q) {
        double* prow = &t_[r * n_];
        const double p = prow[q];
        nz_.clear();
        for (std::size_t j = 0; j < n_; ++j) {
            if (prow[j] != 0.0) {
                prow[j] /= p;
                nz_.push_back(j);
            }
        }
        b_[r] /= p;
        prow[q] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) {
                continue;
            }
            double* row = &t_[i * n_];
            const double f = row[q];
            if (f == 0.0) {
                continue;
            }
            for (std::size_t j : nz_) {
                double v = row[j] - f * prow[j];
                row[j] = std::abs(v) < 1e-13 ? 0.0 : v;
            }
            row[q] = 0.0;
            b_[i] -= f * b_[r];
            if (std::abs(b_[i]) < 1e-13) {
                b_[i] = 0.0;
            }
        }
        const double f = d_[q];
        if (f != 0.0) {
            for (std::size_t j : nz_) {
                d_[j] -= f * prow[j];
            }
            d_[q] = 0.0;
        }
        if (!is_basic_.empty()) {
            is_basic_[basis_[r]] = false;
            is_basic_[q] = true;
        }
        basis_[r] = q;
    }

    Tolerances tol_;
    std::size_t nvar_;
    std::size_t m_ = 0;
    std::size_t n_ = 0;
    std::size_t first_artificial_ = 0;
    std::vector<double> t_;
    std::vector<double> b_;
    std::vector<double> d_;
    std::vector<double> cost_;
    double cost_scale_ = 1.0;
    std::vector<std::size_t> basis_;
    std::vector<bool> is_basic_;
    std::vector<bool> free_;
    std::vector<bool> negated_;
    std::vector<std::size_t> nz_;
    std::size_t iterations_ = 0;
    bool trivially_infeasible_ = false;
};

} // namespace

LpSolution solve(const LpProblem& problem, const Tolerances& tol) {
    problem.validate();
    Tableau tableau(problem, tol);
    LpSolution sol = tableau.run();
    if (sol.status == Status::optimal) {
        sol.objective = evaluate_objective(problem, sol.values);
    }
    return sol;
}

double evaluate_objective(const LpProblem& problem, const std::vector<double>& values) {
    double z = 0;
    for (std::size_t j = 0; j < problem.variable_count(); ++j) {
        z += problem.objective()[j] * values[j];
    }
    return z;
}

double max_violation(const LpProblem& problem, const std::vector<double>& values) {
    double worst = 0;
    for (std::size_t j = 0; j < problem.variable_count(); ++j) {
        if (problem.variables()[j].sign == Sign::nonnegative) {
            worst = std::max(worst, -values[j]);
        }
    }
    for (const auto& row : problem.constraints()) {
        double lhs = 0;
        double s = 0;
        for (const auto& t : row.terms) {
            lhs += t.coef * values[t.var];
            s = std::max(s, std::abs(t.coef));
        }
        if (s == 0) {
            s = 1;
        }
        const double gap = (lhs - row.rhs) / s;
        switch (row.relation) {
        case Relation::less_equal:
            worst = std::max(worst, gap);
            break;
        case Relation::greater_equal:
            worst = std::max(worst, -gap);
            break;
        case Relation::equal:
            worst = std::max(worst, std::abs(gap));
            break;
        }
    }
    return worst;
}

StandardForm to_standard_form(const LpProblem& problem) {
    StandardForm sf;
    const std::size_t n = problem.variable_count();
    sf.column_of.resize(n);
    std::size_t col = 0;
    for (std::size_t j = 0; j < n; ++j) {
        sf.column_of[j].first = col++;
        sf.column_of[j].second = -1;
        if (problem.variables()[j].sign == Sign::free) {
            sf.column_of[j].second = static_cast<std::ptrdiff_t>(col++);
        }
    }
    sf.structural = col;
    for (const auto& row : problem.constraints()) {
        if (row.relation != Relation::equal) {
            ++sf.slacks;
        }
    }
    const std::size_t width = sf.structural + sf.slacks;
    sf.c.assign(width, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        sf.c[sf.column_of[j].first] = problem.objective()[j];
        if (sf.column_of[j].second >= 0) {
            sf.c[static_cast<std::size_t>(sf.column_of[j].second)] = -problem.objective()[j];
        }
    }
    std::size_t slack = sf.structural;
    for (const auto& row : problem.constraints()) {
        std::vector<double> a(width, 0.0);
        for (const auto& t : row.terms) {
            a[sf.column_of[t.var].first] += t.coef;
            if (sf.column_of[t.var].second >= 0) {
                a[static_cast<std::size_t>(sf.column_of[t.var].second)] -= t.coef;
            }
        }
        if (row.relation == Relation::less_equal) {
            a[slack++] = 1.0;
        } else if (row.relation == Relation::greater_equal) {
            a[slack++] = -1.0;
        }
        sf.a.push_back(std::move(a));
        sf.b.push_back(row.rhs);
    }
    return sf;
}

namespace {

std::string lp_name(const LpProblem& p, VarId v) {
    const auto& name = p.variables()[v].name;
    return name.empty() ? "x" + std::to_string(v) : name;
}

void write_terms(std::ostringstream& os, const LpProblem& p, const std::vector<Term>& terms) {
    bool first = true;
    for (const auto& t : terms) {
        if (t.coef == 0) {
            continue;
        }
        os << (t.coef < 0 ? " - " : (first ? " " : " + ")) << std::abs(t.coef) << ' ' << lp_name(p, t.var);
        first = false;
    }
    if (first) {
        os << " 0 " << (p.variable_count() ? lp_name(p, 0) : "x0");
    }
}

} // namespace

std::string to_lp_format(const LpProblem& problem) {
    std::ostringstream os;
    os.precision(17);
    os << "Minimize\n obj:";
    std::vector<Term> obj;
    for (std::size_t j = 0; j < problem.variable_count(); ++j) {
        if (problem.objective()[j] != 0) {
            obj.push_back({j, problem.objective()[j]});
        }
    }
    write_terms(os, problem, obj);
    os << "\nSubject To\n";
    for (std::size_t i = 0; i < problem.constraint_count(); ++i) {
        const auto& row = problem.constraints()[i];
        os << ' ' << (row.name.empty() ? "c" + std::to_string(i) : row.name) << ':';
        write_terms(os, problem, row.terms);
        switch (row.relation) {
        case Relation::less_equal:
            os << " <= ";
            break;
        case Relation::greater_equal:
            os << " >= ";
            break;
        case Relation::equal:
            os << " = ";
            break;
        }
        os << row.rhs << '\n';
    }
    os << "Bounds\n";
    for (std::size_t j = 0; j < problem.variable_count(); ++j) {
        if (problem.variables()[j].sign == Sign::free) {
            os << ' ' << lp_name(problem, j) << " free\n";
        }
    }
    os << "End\n";
    return os.str();
}

} // namespace hrm::lp
