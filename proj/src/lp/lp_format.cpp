#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

#include "evacnet/lp.hpp"

namespace evacnet::lp {

namespace {

std::string var_name(const LPInstance& inst, int j) {
  const auto& name = inst.variables[static_cast<std::size_t>(j)].name;
  return name.empty() ? "c" + std::to_string(j) : name;
}

std::string number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_terms(std::ostream& out, const LPInstance& inst, const std::vector<Term>& terms) {
  bool first = true;
  for (const auto& t : terms) {
    if (t.coef == 0.0) continue;
    out << (t.coef < 0 ? " - " : (first ? " " : " + "));
    const double a = std::abs(t.coef);
    if (a != 1.0) out << number(a) << ' ';
    out << var_name(inst, t.var);
    first = false;
  }
  if (first) out << " 0 " << var_name(inst, 0);
}

}  // namespace

void write_lp_format(const LPInstance& inst, std::ostream& out) {
  out << "\\ columns in declaration order\n";
  out << "Maximize\n obj:";
  std::vector<Term> obj;
  for (int j = 0; j < inst.num_variables(); ++j) {
    if (inst.objective[static_cast<std::size_t>(j)] != 0.0) obj.push_back({j, inst.objective[static_cast<std::size_t>(j)]});
  }
  if (obj.empty() && inst.num_variables() > 0) obj.push_back({0, 0.0});
  if (!obj.empty()) write_terms(out, inst, obj);
  if (inst.objective_constant != 0.0) out << " + " << number(inst.objective_constant) << " constant";
  out << "\nSubject To\n";
  for (int i = 0; i < inst.num_rows(); ++i) {
    const auto& row = inst.rows[static_cast<std::size_t>(i)];
    out << ' ' << (row.name.empty() ? "r" + std::to_string(i) : row.name) << ':';
    write_terms(out, inst, row.terms);
    switch (row.rel) {
      case Relation::LessEqual: out << " <= "; break;
      case Relation::Equal: out << " = "; break;
      case Relation::GreaterEqual: out << " >= "; break;
    }
    out << number(row.rhs) << '\n';
  }
  if (inst.objective_constant != 0.0) out << " fix_constant: constant = 1\n";
  out << "Bounds\n";
  for (int j = 0; j < inst.num_variables(); ++j) {
    const auto& v = inst.variables[static_cast<std::size_t>(j)];
    const std::string name = var_name(inst, j);
    if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out << ' ' << name << " free\n";
    } else if (std::isinf(v.lower)) {
      out << " -inf <= " << name << " <= " << number(v.upper) << '\n';
    } else if (std::isinf(v.upper)) {
      out << ' ' << name << " >= " << number(v.lower) << '\n';
    } else {
      out << ' ' << number(v.lower) << " <= " << name << " <= " << number(v.upper) << '\n';
    }
  }
  out << "End\n";
}

}  // namespace evacnet::lp
