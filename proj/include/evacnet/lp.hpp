#pragma once

#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace evacnet::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, Equal, GreaterEqual };
enum class Status { Optimal, Infeasible, Unbounded };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
};

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Row {
  std::vector<Term> terms;
  Relation rel = Relation::LessEqual;
  double rhs = 0.0;
  std::string name;
};

/// Maximization problem with bounded variables and sparse rows.
struct LPInstance {
  std::vector<Variable> variables;
  std::vector<Row> rows;
  std::vector<double> objective;  // one coefficient per variable
  double objective_constant = 0.0;

  int add_variable(std::string name, double lower, double upper);
  int add_row(std::vector<Term> terms, Relation rel, double rhs, std::string name = {});
  void add_objective(int var, double coef);

  int num_variables() const { return static_cast<int>(variables.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  /// Throws ConfigError when bounds are inverted or a row names an unknown
  /// variable.
  void validate() const;
};

struct SolverOptions {
  double tolerance = 1e-7;     // primal feasibility and optimality
  int refactor_interval = 100;  // basis updates between refactorizations
  long max_iterations = 50'000'000;
};

struct LPSolution {
  Status status = Status::Infeasible;
  std::vector<double> values;
  double objective = 0.0;
  bool integral = false;  // every value within 1e-7 of an integer
  long iterations = 0;
};

/// Bounded-variable primal simplex (revised form, sparse LU of the basis with
/// product-form updates). Dantzig pricing, switching to Bland's rule after
/// 3 * (rows + cols) pivots without objective progress.
LPSolution solve_lp(const LPInstance& inst, const SolverOptions& options = {});

/// Depth-first branch and bound treating every variable as integer. Throws
/// NodeLimitExceeded after `node_limit` subproblems.
LPSolution solve_integer(const LPInstance& inst, long node_limit,
                         const SolverOptions& options = {});

/// Largest bound or row violation of `values`.
double max_violation(const LPInstance& inst, std::span<const double> values);

/// Objective of `values` (including the constant).
double evaluate(const LPInstance& inst, std::span<const double> values);

/// CPLEX LP text. Columns appear in declaration order.
void write_lp_format(const LPInstance& inst, std::ostream& out);

std::string_view to_string(Status status);

}  // namespace evacnet::lp
