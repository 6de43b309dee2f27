#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "evacnet/errors.hpp"
#include "evacnet/lp.hpp"

namespace evacnet::lp {

namespace {
constexpr double kIntTol = 1e-7;

// Most fractional variable, or -1 when the point is integral.
int branching_variable(const std::vector<double>& x) {
  int best = -1;
  double best_frac = kIntTol;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double f = std::abs(x[j] - std::round(x[j]));
    if (f > best_frac) {
      best_frac = f;
      best = static_cast<int>(j);
    }
  }
  return best;
}
}  // namespace

LPSolution solve_integer(const LPInstance& inst, long node_limit, const SolverOptions& options) {
  inst.validate();
  struct Node {
    std::vector<double> lower, upper;
  };
  Node root;
  for (const auto& v : inst.variables) {
    root.lower.push_back(std::ceil(v.lower - kIntTol));
    root.upper.push_back(std::floor(v.upper + kIntTol));
  }

  LPSolution incumbent;
  incumbent.status = Status::Infeasible;
  bool have_incumbent = false;
  long nodes = 0;
  long iterations = 0;

  std::vector<Node> stack;
  stack.push_back(std::move(root));
  LPInstance sub = inst;
  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    if (++nodes > node_limit) {
      throw NodeLimitExceeded("branch and bound exceeded " + std::to_string(node_limit) + " nodes");
    }
    bool empty_box = false;
    for (std::size_t j = 0; j < sub.variables.size(); ++j) {
      sub.variables[j].lower = node.lower[j];
      sub.variables[j].upper = node.upper[j];
      if (node.lower[j] > node.upper[j]) empty_box = true;
    }
    if (empty_box) continue;

    LPSolution relax = solve_lp(sub, options);
    iterations += relax.iterations;
    if (relax.status == Status::Unbounded) {
      relax.iterations = iterations;
      return relax;
    }
    if (relax.status != Status::Optimal) continue;
    if (have_incumbent && relax.objective <= incumbent.objective + 1e-9) continue;

    const int j = branching_variable(relax.values);
    if (j < 0) {
      for (double& v : relax.values) v = std::round(v);
      relax.objective = evaluate(inst, relax.values);
      relax.integral = true;
      incumbent = std::move(relax);
      have_incumbent = true;
      continue;
    }
    const auto J = static_cast<std::size_t>(j);
    const double v = relax.values[J];
    Node down = node;
    down.upper[J] = std::floor(v);
    Node up = std::move(node);
    up.lower[J] = std::ceil(v);
    // The up branch is pushed last so it is explored first.
    stack.push_back(std::move(down));
    stack.push_back(std::move(up));
  }
  incumbent.iterations = iterations;
  return incumbent;
}

}  // namespace evacnet::lp
