#include "cspsamp/formula.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

namespace cspsamp {

namespace {

void validate_constraint(const AtomicConstraint& c, int num_vars,
                         const std::vector<int32_t>& domain_sizes) {
  if (c.scope.size() != c.forbidden.size())
    throw MalformedConstraint("scope and forbidden tuple have different arity");
  std::unordered_set<int32_t> seen;
  for (size_t i = 0; i < c.scope.size(); ++i) {
    const int32_t v = c.scope[i];
    if (v < 0 || v >= num_vars) throw MalformedConstraint("variable index out of range");
    if (!seen.insert(v).second) throw MalformedConstraint("repeated variable in scope");
    if (c.forbidden[i] < 0 || c.forbidden[i] >= domain_sizes[v])
      throw MalformedConstraint("forbidden value outside the variable's domain");
  }
}

void validate_parts(const std::vector<int32_t>& domain_sizes,
                    const std::vector<AtomicConstraint>& constraints,
                    const std::vector<std::vector<std::string>>& value_labels,
                    int32_t min_domain) {
  const int n = static_cast<int>(domain_sizes.size());
  for (int32_t q : domain_sizes)
    if (q < min_domain) throw DomainTooSmall("domain size " + std::to_string(q));
  for (const AtomicConstraint& c : constraints) validate_constraint(c, n, domain_sizes);
  if (!value_labels.empty() && static_cast<int>(value_labels.size()) != n)
    throw MalformedConstraint("value label table does not match the variable count");
}

}  // namespace

CspFormula build_formula(int num_vars, std::vector<int32_t> domain_sizes,
                         std::vector<AtomicConstraint> constraints,
                         std::vector<std::vector<std::string>> value_labels) {
  if (num_vars != static_cast<int>(domain_sizes.size()))
    throw MalformedConstraint("domain size list does not match the variable count");
  validate_parts(domain_sizes, constraints, value_labels, 2);
  return CspFormula(std::move(domain_sizes), std::move(constraints), std::move(value_labels));
}

CspFormula make_formula_unit_domains_ok(std::vector<int32_t> domain_sizes,
                                        std::vector<AtomicConstraint> constraints) {
  validate_parts(domain_sizes, constraints, {}, 1);
  return CspFormula(std::move(domain_sizes), std::move(constraints), {});
}

bool evaluate(const CspFormula& formula, const Assignment& assignment) {
  if (static_cast<int>(assignment.size()) != formula.num_vars())
    throw IncompleteAssignment("assignment length " + std::to_string(assignment.size()) +
                               " for " + std::to_string(formula.num_vars()) + " variables");
  for (const AtomicConstraint& c : formula.constraints()) {
    bool hit = true;
    for (size_t i = 0; i < c.scope.size(); ++i) {
      if (assignment[c.scope[i]] != c.forbidden[i]) {
        hit = false;
        break;
      }
    }
    if (hit) return false;
  }
  return true;
}

std::vector<AtomicConstraint> atomize_general_constraint(
    const std::vector<int32_t>& scope, const std::vector<std::vector<Value>>& violating) {
  std::set<std::vector<Value>> seen;
  std::vector<AtomicConstraint> out;
  out.reserve(violating.size());
  for (const std::vector<Value>& tuple : violating) {
    if (tuple.size() != scope.size())
      throw MalformedConstraint("violating tuple arity does not match the scope");
    if (!seen.insert(tuple).second)
      throw DuplicateViolatingTuple("violating tuple listed twice");
    out.push_back(AtomicConstraint{scope, tuple});
  }
  return out;
}

DependencyGraph build_dependency_graph(const CspFormula& formula) {
  const int n = formula.num_vars();
  const int m = formula.num_constraints();
  DependencyGraph g;
  g.var_incidence.assign(n, {});
  for (int c = 0; c < m; ++c)
    for (int32_t v : formula.constraint(c).scope) g.var_incidence[v].push_back(c);

  g.adjacency.assign(m, {});
  std::vector<int32_t> mark(m, -1);
  for (int c = 0; c < m; ++c) {
    auto& adj = g.adjacency[c];
    for (int32_t v : formula.constraint(c).scope) {
      for (int32_t other : g.var_incidence[v]) {
        if (other == c || mark[other] == c) continue;
        mark[other] = c;
        adj.push_back(other);
      }
    }
    std::sort(adj.begin(), adj.end());
    g.max_degree = std::max(g.max_degree, static_cast<int32_t>(adj.size()));
  }
  return g;
}

FormulaStats compute_stats(const CspFormula& formula) {
  FormulaStats s;
  s.num_vars = formula.num_vars();
  s.num_constraints = formula.num_constraints();

  s.max_domain = 0;
  for (int v = 0; v < formula.num_vars(); ++v) {
    const int32_t q = formula.domain_size(v);
    s.max_domain = std::max(s.max_domain, q);
    if (q != formula.domain_size(0)) s.homogeneous_domains = false;
  }

  const DependencyGraph g = build_dependency_graph(formula);
  s.max_degree = g.max_degree;
  for (const auto& inc : g.var_incidence)
    s.max_var_degree = std::max(s.max_var_degree, static_cast<int32_t>(inc.size()));

  if (formula.num_constraints() == 0) {
    s.max_width = s.min_width = 0;
    return s;  // log2_inv_p stays +inf, p_denominator unset
  }

  s.min_width = formula.constraint(0).width();
  double min_bits = std::numeric_limits<double>::infinity();
  int argmin = 0;
  for (int c = 0; c < formula.num_constraints(); ++c) {
    const AtomicConstraint& con = formula.constraint(c);
    s.max_width = std::max(s.max_width, con.width());
    s.min_width = std::min(s.min_width, con.width());
    if (con.width() != formula.constraint(0).width()) s.uniform_width = false;
    double bits = 0;
    for (int32_t v : con.scope) bits += std::log2(static_cast<double>(formula.domain_size(v)));
    if (bits < min_bits) {
      min_bits = bits;
      argmin = c;
    }
  }
  s.log2_inv_p = min_bits;

  // exact denominator of p for the minimising constraint, while it fits
  uint64_t den = 1;
  bool fits = true;
  for (int32_t v : formula.constraint(argmin).scope) {
    const uint64_t q = static_cast<uint64_t>(formula.domain_size(v));
    if (den > UINT64_MAX / q) {
      fits = false;
      break;
    }
    den *= q;
  }
  if (fits) s.p_denominator = den;
  return s;
}

}  // namespace cspsamp
