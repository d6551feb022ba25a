#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hrm::lp {

using VarId = std::size_t;

enum class Sign { nonnegative, free };
enum class Relation { less_equal, greater_equal, equal };
enum class Status { optimal, infeasible, unbounded };

std::string to_string(Status s);

struct Term {
    VarId var;
    double coef;
};

struct Variable {
    std::string name;
    Sign sign = Sign::nonnegative;
};

struct Constraint {
    std::vector<Term> terms;
    Relation relation;
    double rhs;
    std::string name;
};

class LpError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Minimization problem over declared variables.
class LpProblem {
public:
    VarId add_variable(std::string name, Sign sign = Sign::nonnegative);

    /// Adds `coef` to the objective coefficient of `var`.
    void add_objective(VarId var, double coef);
    void add_constraint(std::vector<Term> terms, Relation rel, double rhs, std::string name = {});

    std::size_t variable_count() const { return vars_.size(); }
    std::size_t constraint_count() const { return rows_.size(); }
    const std::vector<Variable>& variables() const { return vars_; }
    const std::vector<double>& objective() const { return cost_; }
    const std::vector<Constraint>& constraints() const { return rows_; }

    /// Throws LpError on undeclared variables or non-finite coefficients.
    void validate() const;

private:
    std::vector<Variable> vars_;
    std::vector<double> cost_;
    std::vector<Constraint> rows_;
};

struct Tolerances {
    double feasibility = 1e-7;
    double objective = 1e-6;
    double pivot = 1e-9;
    /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
    std::size_t degenerate_limit = 50;
    std::size_t max_iterations = 1'000'000;
};

struct LpSolution {
    Status status = Status::infeasible;
    double objective = 0;
    std::vector<double> values;
    std::size_t iterations = 0;

    double operator[](VarId v) const { return values[v]; }
};

LpSolution solve(const LpProblem& problem, const Tolerances& tol = {});

/// Largest violation of any constraint or sign restriction by `values`,
/// measured on rows scaled to unit max-coefficient.
double max_violation(const LpProblem& problem, const std::vector<double>& values);

double evaluate_objective(const LpProblem& problem, const std::vector<double>& values);

/// Equality form min c'x, Ax = b, x >= 0: free variables split into a
/// positive and negative part, one slack or surplus per inequality.
struct StandardForm {
    std::size_t structural = 0; ///< columns after splitting, before slacks
    std::size_t slacks = 0;
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    std::vector<double> c;
    /// For each original variable: its positive column and, when split, its negative column.
    std::vector<std::pair<std::size_t, std::ptrdiff_t>> column_of;
};

StandardForm to_standard_form(const LpProblem& problem);

/// CPLEX-style LP text, for cross-checking with external solvers.
std::string to_lp_format(const LpProblem& problem);

} // namespace hrm::lp
