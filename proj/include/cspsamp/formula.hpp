#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cspsamp/errors.hpp"

namespace cspsamp {

using Value = int32_t;
using Assignment = std::vector<Value>;

// One forbidden tuple over a scope of distinct variables. The constraint is
// violated exactly when the assignment restricted to the scope equals the
// tuple; every other assignment satisfies it.
struct AtomicConstraint {
  std::vector<int32_t> scope;
  std::vector<Value> forbidden;

  int width() const { return static_cast<int>(scope.size()); }
};

// Finite-domain CSP in which every constraint is atomic. Variable v ranges
// over {0, ..., domain_size(v)-1}. Duplicate constraints are permitted and
// kept as distinct entries.
class CspFormula {
 public:
  CspFormula() = default;

  int num_vars() const { return static_cast<int>(domain_sizes_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  int32_t domain_size(int v) const { return domain_sizes_[v]; }
  const std::vector<int32_t>& domain_sizes() const { return domain_sizes_; }
  const AtomicConstraint& constraint(int c) const { return constraints_[c]; }
  const std::vector<AtomicConstraint>& constraints() const { return constraints_; }

  // Presentation-only value names; empty when unset.
  const std::vector<std::vector<std::string>>& value_labels() const { return value_labels_; }

  friend CspFormula build_formula(int, std::vector<int32_t>, std::vector<AtomicConstraint>,
                                  std::vector<std::vector<std::string>>);

  // Same validation as build_formula except domains of size 1 are accepted.
  // Projected formulas live on the compressed alphabet, where a fully
  // compressed variable has a single symbol.
  friend CspFormula make_formula_unit_domains_ok(std::vector<int32_t>,
                                                 std::vector<AtomicConstraint>);

 private:
  CspFormula(std::vector<int32_t> domain_sizes, std::vector<AtomicConstraint> constraints,
             std::vector<std::vector<std::string>> value_labels)
      : domain_sizes_(std::move(domain_sizes)),
        constraints_(std::move(constraints)),
        value_labels_(std::move(value_labels)) {}

  std::vector<int32_t> domain_sizes_;
  std::vector<AtomicConstraint> constraints_;
  std::vector<std::vector<std::string>> value_labels_;
};

// Validates and assembles a formula. Throws DomainTooSmall when some
// domain_size < 2, MalformedConstraint on out-of-range variable indices,
// repeated variables in a scope, arity mismatch between scope and tuple, or
// out-of-domain tuple values. Empty scopes are legal (such a constraint is
// violated by every assignment).
CspFormula build_formula(int num_vars, std::vector<int32_t> domain_sizes,
                         std::vector<AtomicConstraint> constraints,
                         std::vector<std::vector<std::string>> value_labels = {});

CspFormula make_formula_unit_domains_ok(std::vector<int32_t> domain_sizes,
                                        std::vector<AtomicConstraint> constraints);

// TRUE iff no constraint is violated. Throws IncompleteAssignment when the
// assignment length differs from num_vars.
bool evaluate(const CspFormula& formula, const Assignment& assignment);

// Splits a general constraint (explicit list of violating tuples over a
// scope) into one atomic constraint per tuple. Tuples must be distinct
// (DuplicateViolatingTuple) and match the scope arity (MalformedConstraint).
std::vector<AtomicConstraint> atomize_general_constraint(
    const std::vector<int32_t>& scope, const std::vector<std::vector<Value>>& violating);

// Constraints are adjacent when their scopes share a variable. Duplicate
// constraints occupy distinct nodes.
struct DependencyGraph {
  std::vector<std::vector<int32_t>> adjacency;      // per constraint, sorted
  std::vector<std::vector<int32_t>> var_incidence;  // constraints containing v
  int32_t max_degree = 0;
};

DependencyGraph build_dependency_graph(const CspFormula& formula);

struct FormulaStats {
  int num_vars = 0;
  int num_constraints = 0;
  int32_t max_degree = 0;     // D: most neighbours any constraint has
  int max_width = 0;          // k: widest scope
  int min_width = 0;
  int32_t max_domain = 0;     // q
  int32_t max_var_degree = 0; // d: most constraints any variable appears in
  bool homogeneous_domains = true;
  bool uniform_width = true;
  // Worst-case violation probability p of one constraint under the uniform
  // product distribution: log2(1/p) = min over constraints of sum of
  // log2 q_v across the scope. +inf when there are no constraints. The exact
  // rational form p = 1/p_denominator is kept while the denominator fits a
  // 64-bit integer.
  double log2_inv_p = std::numeric_limits<double>::infinity();
  std::optional<uint64_t> p_denominator;
};

FormulaStats compute_stats(const CspFormula& formula);

}  // namespace cspsamp
