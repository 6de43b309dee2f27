#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "evacnet/errors.hpp"
#include "evacnet/lp.hpp"
#include "sparse_lu.hpp"

namespace evacnet::lp {

int LPInstance::add_variable(std::string name, double lower, double upper) {
  variables.push_back({std::move(name), lower, upper});
  objective.push_back(0.0);
  return static_cast<int>(variables.size()) - 1;
}

int LPInstance::add_row(std::vector<Term> terms, Relation rel, double rhs, std::string name) {
  rows.push_back({std::move(terms), rel, rhs, std::move(name)});
  return static_cast<int>(rows.size()) - 1;
}

void LPInstance::add_objective(int var, double coef) {
  objective.at(static_cast<std::size_t>(var)) += coef;
}

void LPInstance::validate() const {
  if (objective.size() != variables.size()) {
    throw ConfigError("objective has " + std::to_string(objective.size()) +
                      " coefficients for " + std::to_string(variables.size()) + " variables");
  }
  for (const auto& v : variables) {
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper) {
      throw ConfigError("variable '" + v.name + "' has inverted bounds");
    }
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& t : rows[r].terms) {
      if (t.var < 0 || t.var >= num_variables()) {
        throw ConfigError("row " + std::to_string(r) + " references unknown variable " +
                          std::to_string(t.var));
      }
    }
  }
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
  }
  return "?";
}

double evaluate(const LPInstance& inst, std::span<const double> values) {
  double z = inst.objective_constant;
  for (std::size_t j = 0; j < inst.objective.size(); ++j) z += inst.objective[j] * values[j];
  return z;
}

double max_violation(const LPInstance& inst, std::span<const double> values) {
  double worst = 0.0;
  for (std::size_t j = 0; j < inst.variables.size(); ++j) {
    const auto& v = inst.variables[j];
    worst = std::max({worst, v.lower - values[j], values[j] - v.upper});
  }
  for (const auto& row : inst.rows) {
    double lhs = 0.0;
    for (const auto& t : row.terms) lhs += t.coef * values[static_cast<std::size_t>(t.var)];
    if (row.rel != Relation::GreaterEqual) worst = std::max(worst, lhs - row.rhs);
    if (row.rel != Relation::LessEqual) worst = std::max(worst, row.rhs - lhs);
  }
  return worst;
}

namespace {

using detail::SparseLU;

enum State : signed char { kBasic, kAtLower, kAtUpper, kFree };

struct Eta {
  int r = 0;
  double pivot = 1.0;
  std::vector<std::pair<int, double>> col;  // (position, alpha), r excluded
};

// Columns are the structurals followed by one logical per row (A x - r = 0,
// the logical carrying the row's relation as bounds) and the phase-one
// artificials.
class Simplex {
 public:
  Simplex(const LPInstance& inst, const SolverOptions& opt) : inst_(inst), opt_(opt) {
    m_ = inst.num_rows();
    n_ = inst.num_variables();
    const auto M = static_cast<std::size_t>(m_);
    for (int j = 0; j < n_; ++j) {
      const auto& v = inst.variables[static_cast<std::size_t>(j)];
      add_column({}, v.lower, v.upper);
    }
    for (int i = 0; i < m_; ++i) {
      for (const auto& t : inst.rows[static_cast<std::size_t>(i)].terms) {
        if (t.coef != 0.0) cols_[static_cast<std::size_t>(t.var)].emplace_back(i, t.coef);
      }
    }
    for (auto& c : cols_) merge_duplicates(c);
    for (int i = 0; i < m_; ++i) {
      const auto& row = inst.rows[static_cast<std::size_t>(i)];
      const double lo = row.rel == Relation::LessEqual ? -kInf : row.rhs;
      const double hi = row.rel == Relation::GreaterEqual ? kInf : row.rhs;
      add_column({{i, -1.0}}, lo, hi);
    }
    head_.assign(M, -1);
  }

  LPSolution run() {
    LPSolution sol;
    // Structurals start at a bound, logicals are basic.
    for (int j = 0; j < n_; ++j) place_at_bound(j);
    std::vector<double> activity(static_cast<std::size_t>(m_), 0.0);
    for (int j = 0; j < n_; ++j) {
      const double xj = x_[static_cast<std::size_t>(j)];
      if (xj == 0.0) continue;
      for (const auto& [i, a] : cols_[static_cast<std::size_t>(j)]) {
        activity[static_cast<std::size_t>(i)] += a * xj;
      }
    }
    std::vector<int> artificials;
    for (int i = 0; i < m_; ++i) {
      const int lj = n_ + i;
      const double act = activity[static_cast<std::size_t>(i)];
      const double lo = lb_[static_cast<std::size_t>(lj)];
      const double hi = ub_[static_cast<std::size_t>(lj)];
      if (act >= lo - opt_.tolerance && act <= hi + opt_.tolerance) {
        make_basic(lj, i);
        x_[static_cast<std::size_t>(lj)] = act;
        continue;
      }
      // Logical parks at the violated bound; an artificial absorbs the gap.
      const double bound = act < lo ? lo : hi;
      x_[static_cast<std::size_t>(lj)] = bound;
      state_[static_cast<std::size_t>(lj)] = act < lo ? kAtLower : kAtUpper;
      const double gap = act - bound;  // row: activity - r + s*art = 0
      const double sign = gap > 0 ? -1.0 : 1.0;
      const int aj = add_column({{i, sign}}, 0.0, kInf);
      x_[static_cast<std::size_t>(aj)] = std::abs(gap);
      make_basic(aj, i);
      artificials.push_back(aj);
    }
    pos_.resize(cols_.size(), -1);
    for (int i = 0; i < m_; ++i) pos_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] = i;

    refactor();
    compute_xb();

    if (!artificials.empty()) {
      cost_.assign(cols_.size(), 0.0);
      for (int aj : artificials) cost_[static_cast<std::size_t>(aj)] = 1.0;
      iterate();
      double infeas = 0.0;
      for (int aj : artificials) infeas += std::abs(x_[static_cast<std::size_t>(aj)]);
      if (infeas > 1e-6) {
        sol.status = Status::Infeasible;
        sol.iterations = iterations_;
        return sol;
      }
      for (int aj : artificials) {
        lb_[static_cast<std::size_t>(aj)] = 0.0;
        ub_[static_cast<std::size_t>(aj)] = 0.0;
        if (state_[static_cast<std::size_t>(aj)] != kBasic) {
          state_[static_cast<std::size_t>(aj)] = kAtLower;
          x_[static_cast<std::size_t>(aj)] = 0.0;
        }
      }
    }

    cost_.assign(cols_.size(), 0.0);
    for (int j = 0; j < n_; ++j) cost_[static_cast<std::size_t>(j)] = -inst_.objective[static_cast<std::size_t>(j)];
    if (!iterate()) {
      sol.status = Status::Unbounded;
      sol.iterations = iterations_;
      return sol;
    }
    refactor();
    compute_xb();

    sol.status = Status::Optimal;
    sol.values.assign(x_.begin(), x_.begin() + n_);
    for (double& v : sol.values) {
      const double r = std::round(v);
      if (std::abs(v - r) < 1e-9) v = r;
    }
    sol.objective = evaluate(inst_, sol.values);
    sol.integral = std::all_of(sol.values.begin(), sol.values.end(),
                               [](double v) { return std::abs(v - std::round(v)) <= 1e-7; });
    sol.iterations = iterations_;
    return sol;
  }

 private:
  static void merge_duplicates(SparseLU::Column& c) {
    if (c.size() < 2) return;
    std::sort(c.begin(), c.end());
    std::size_t w = 0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (w > 0 && c[w - 1].first == c[k].first) {
        c[w - 1].second += c[k].second;
      } else {
        c[w++] = c[k];
      }
    }
    c.resize(w);
    c.erase(std::remove_if(c.begin(), c.end(), [](const auto& e) { return e.second == 0.0; }),
            c.end());
  }

  int add_column(SparseLU::Column c, double lo, double hi) {
    cols_.push_back(std::move(c));
    lb_.push_back(lo);
    ub_.push_back(hi);
    x_.push_back(0.0);
    state_.push_back(kAtLower);
    return static_cast<int>(cols_.size()) - 1;
  }

  void place_at_bound(int j) {
    const auto J = static_cast<std::size_t>(j);
    if (std::isfinite(lb_[J])) {
      x_[J] = lb_[J];
      state_[J] = kAtLower;
    } else if (std::isfinite(ub_[J])) {
      x_[J] = ub_[J];
      state_[J] = kAtUpper;
    } else {
      x_[J] = 0.0;
      state_[J] = kFree;
    }
  }

  void make_basic(int j, int position) {
    head_[static_cast<std::size_t>(position)] = j;
    state_[static_cast<std::size_t>(j)] = kBasic;
  }

  void refactor() {
    etas_.clear();
    std::vector<SparseLU::Column> basis(static_cast<std::size_t>(m_));
    for (int attempt = 0;; ++attempt) {
      for (int i = 0; i < m_; ++i) {
        basis[static_cast<std::size_t>(i)] = cols_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])];
      }
      if (lu_.factor(m_, basis)) return;
      if (attempt > 2) throw SolverError("basis repair failed");
      // Swap the logicals of unpivoted rows in for the dependent columns.
      const auto& bad = lu_.singular_positions();
      const auto& rows = lu_.unpivoted_rows();
      for (std::size_t k = 0; k < bad.size(); ++k) {
        const int p = bad[k];
        const int leaving = head_[static_cast<std::size_t>(p)];
        pos_[static_cast<std::size_t>(leaving)] = -1;
        place_at_bound(leaving);
        const int entering = n_ + rows[k];
        head_[static_cast<std::size_t>(p)] = entering;
        pos_[static_cast<std::size_t>(entering)] = p;
        state_[static_cast<std::size_t>(entering)] = kBasic;
      }
    }
  }

  void compute_xb() {
    std::vector<double> rhs(static_cast<std::size_t>(m_), 0.0);
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      if (state_[j] == kBasic || x_[j] == 0.0) continue;
      for (const auto& [i, a] : cols_[j]) rhs[static_cast<std::size_t>(i)] -= a * x_[j];
    }
    std::vector<double> xb;
    lu_.ftran(rhs, xb);
    apply_etas(xb);
    for (int i = 0; i < m_; ++i) x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] = xb[static_cast<std::size_t>(i)];
  }

  void apply_etas(std::vector<double>& v) const {
    for (const Eta& e : etas_) {
      const double vr = v[static_cast<std::size_t>(e.r)] / e.pivot;
      v[static_cast<std::size_t>(e.r)] = vr;
      if (vr == 0.0) continue;
      for (const auto& [i, a] : e.col) v[static_cast<std::size_t>(i)] -= a * vr;
    }
  }

  void ftran_column(int q, std::vector<double>& alpha) {
    work_.assign(static_cast<std::size_t>(m_), 0.0);
    for (const auto& [i, a] : cols_[static_cast<std::size_t>(q)]) work_[static_cast<std::size_t>(i)] = a;
    lu_.ftran(work_, alpha);
    apply_etas(alpha);
  }

  void btran(std::vector<double>& w, std::vector<double>& pi) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = w[static_cast<std::size_t>(it->r)];
      for (const auto& [i, a] : it->col) s -= a * w[static_cast<std::size_t>(i)];
      w[static_cast<std::size_t>(it->r)] = s / it->pivot;
    }
    lu_.btran(w, pi);
  }

  double objective_value() const {
    double z = 0.0;
    for (std::size_t j = 0; j < cols_.size(); ++j) z += cost_[j] * x_[j];
    return z;
  }

  // Returns false when the objective is unbounded below.
  bool iterate() {
    const double tol = opt_.tolerance;
    const double ptol = 1e-9;
    const long bland_after = 3L * (m_ + static_cast<long>(cols_.size()));
    long stalled = 0;
    bool bland = false;
    double current = objective_value();
    double best = current;
    const auto M = static_cast<std::size_t>(m_);
    std::vector<double> cb(M), pi, alpha;

    for (;;) {
      if (iterations_ >= opt_.max_iterations) throw SolverError("simplex iteration limit reached");
      if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
        refactor();
        compute_xb();
      }
      for (int i = 0; i < m_; ++i) cb[static_cast<std::size_t>(i)] = cost_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])];
      btran(cb, pi);

      int q = -1;
      int dir = 0;
      double score = 0.0;
      double dq = 0.0;
      for (std::size_t j = 0; j < cols_.size(); ++j) {
        const State s = static_cast<State>(state_[j]);
        if (s == kBasic || lb_[j] == ub_[j]) continue;
        double d = cost_[j];
        for (const auto& [i, a] : cols_[j]) d -= pi[static_cast<std::size_t>(i)] * a;
        int dj = 0;
        if ((s == kAtLower || s == kFree) && d < -tol) dj = 1;
        if ((s == kAtUpper || s == kFree) && d > tol) dj = -1;
        if (dj == 0) continue;
        if (bland) {
          q = static_cast<int>(j);
          dir = dj;
          dq = d;
          break;
        }
        if (std::abs(d) > score) {
          score = std::abs(d);
          q = static_cast<int>(j);
          dir = dj;
          dq = d;
        }
      }
      if (q < 0) return true;

      ftran_column(q, alpha);
      const auto Q = static_cast<std::size_t>(q);

      // Ratio test: x_B moves by -dir * theta * alpha.
      auto raw_ratio = [&](int i, double tolerance) {
        const double a = alpha[static_cast<std::size_t>(i)];
        const double g = -dir * a;
        const auto j = static_cast<std::size_t>(head_[static_cast<std::size_t>(i)]);
        if (g < 0) {
          if (!std::isfinite(lb_[j])) return kInf;
          return std::max(0.0, x_[j] - lb_[j] + tolerance) / -g;
        }
        if (!std::isfinite(ub_[j])) return kInf;
        return std::max(0.0, ub_[j] - x_[j] + tolerance) / g;
      };
      const double flip = std::isfinite(lb_[Q]) && std::isfinite(ub_[Q]) ? ub_[Q] - lb_[Q] : kInf;
      int r = -1;
      double theta = kInf;
      if (bland) {
        for (int i = 0; i < m_; ++i) {
          if (std::abs(alpha[static_cast<std::size_t>(i)]) < ptol) continue;
          const double t = raw_ratio(i, 0.0);
          if (t < theta - 1e-12 ||
              (t <= theta + 1e-12 && r >= 0 && head_[static_cast<std::size_t>(i)] < head_[static_cast<std::size_t>(r)])) {
            theta = std::min(theta, t);
            r = i;
          }
        }
      } else {
        double bound = kInf;
        for (int i = 0; i < m_; ++i) {
          if (std::abs(alpha[static_cast<std::size_t>(i)]) < ptol) continue;
          bound = std::min(bound, raw_ratio(i, tol));
        }
        if (bound < kInf) {
          double best_abs = 0.0;
          for (int i = 0; i < m_; ++i) {
            const double a = std::abs(alpha[static_cast<std::size_t>(i)]);
            if (a < ptol) continue;
            const double t = raw_ratio(i, 0.0);
            if (t <= bound && a > best_abs) {
              best_abs = a;
              r = i;
              theta = t;
            }
          }
        }
      }
      if (r < 0 && flip == kInf) return false;

      const bool do_flip = flip <= theta;
      if (do_flip) theta = flip;
      ++iterations_;

      if (theta != 0.0) {
        x_[Q] += dir * theta;
        for (int i = 0; i < m_; ++i) {
          const double a = alpha[static_cast<std::size_t>(i)];
          if (a != 0.0) x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] -= dir * theta * a;
        }
      }
      if (do_flip) {
        if (state_[Q] == kAtLower) {
          state_[Q] = kAtUpper;
          x_[Q] = ub_[Q];
        } else {
          state_[Q] = kAtLower;
          x_[Q] = lb_[Q];
        }
      } else {
        const auto R = static_cast<std::size_t>(r);
        const auto l = static_cast<std::size_t>(head_[R]);
        const double g = -dir * alpha[R];
        if (g < 0 || lb_[l] == ub_[l]) {
          x_[l] = lb_[l];
          state_[l] = kAtLower;
        } else {
          x_[l] = ub_[l];
          state_[l] = kAtUpper;
        }
        pos_[l] = -1;
        head_[R] = q;
        pos_[Q] = r;
        state_[Q] = kBasic;
        Eta e;
        e.r = r;
        e.pivot = alpha[R];
        for (int i = 0; i < m_; ++i) {
          const double a = alpha[static_cast<std::size_t>(i)];
          if (i != r && std::abs(a) > 1e-12) e.col.emplace_back(i, a);
        }
        etas_.push_back(std::move(e));
      }

      current += dq * dir * theta;
      if (current < best - 1e-9 * (1.0 + std::abs(best))) {
        best = current;
        stalled = 0;
        bland = false;
      } else if (++stalled > bland_after) {
        bland = true;
      }
    }
  }

  const LPInstance& inst_;
  const SolverOptions& opt_;
  int m_ = 0;
  int n_ = 0;
  std::vector<SparseLU::Column> cols_;
  std::vector<double> lb_, ub_, x_, cost_;
  std::vector<signed char> state_;
  std::vector<int> head_, pos_;
  SparseLU lu_;
  std::vector<Eta> etas_;
  std::vector<double> work_;
  long iterations_ = 0;
};

}  // namespace

LPSolution solve_lp(const LPInstance& inst, const SolverOptions& options) {
  inst.validate();
  Simplex simplex(inst, options);
  return simplex.run();
}

}  // namespace evacnet::lp
