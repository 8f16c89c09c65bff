#pragma once

// Random instance and scheme builders shared by the unit and acceptance
// suites. All draws go through the library Rng so regenerating with the same
// seed reproduces the same corpus.

#include <algorithm>
#include <numeric>
#include <vector>

#include "cspsamp/formula.hpp"
#include "cspsamp/projection.hpp"
#include "cspsamp/rng.hpp"

namespace testgen {

using namespace cspsamp;

inline std::vector<int32_t> random_scope(int n, int width, Rng& rng) {
  std::vector<int32_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < width; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(width);
  return pool;
}

// Mixed-domain atomic CSP with `m` random forbidden tuples.
inline CspFormula random_acsp(int n, int m, int32_t q_min, int32_t q_max, int w_min, int w_max,
                              Rng& rng) {
  std::vector<int32_t> domains(n);
  for (int v = 0; v < n; ++v)
    domains[v] = q_min + static_cast<int32_t>(rng.below(static_cast<uint64_t>(q_max - q_min + 1)));
  std::vector<AtomicConstraint> cons;
  for (int c = 0; c < m; ++c) {
    const int w =
        std::min(n, w_min + static_cast<int>(rng.below(static_cast<uint64_t>(w_max - w_min + 1))));
    AtomicConstraint con;
    con.scope = random_scope(n, w, rng);
    for (const int32_t v : con.scope)
      con.forbidden.push_back(static_cast<Value>(rng.below(static_cast<uint64_t>(domains[v]))));
    cons.push_back(std::move(con));
  }
  return build_formula(n, std::move(domains), std::move(cons));
}

// k-CNF with distinct variables per clause, as a formula (clause -> one
// forbidden point).
inline CspFormula random_cnf(int n, int m, int k, Rng& rng) {
  std::vector<AtomicConstraint> cons;
  for (int c = 0; c < m; ++c) {
    AtomicConstraint con;
    con.scope = random_scope(n, k, rng);
    for (size_t i = 0; i < con.scope.size(); ++i)
      con.forbidden.push_back(static_cast<Value>(rng.below(2)));
    cons.push_back(std::move(con));
  }
  return build_formula(n, std::vector<int32_t>(n, 2), std::move(cons));
}

// k-uniform hypergraph colouring: m distinct-vertex edges, q constraints per
// edge forbidding each monochromatic tuple.
inline CspFormula random_coloring(int n, int m, int k, int32_t q, Rng& rng) {
  std::vector<AtomicConstraint> cons;
  for (int e = 0; e < m; ++e) {
    const std::vector<int32_t> edge = random_scope(n, k, rng);
    for (int32_t colour = 0; colour < q; ++colour) {
      AtomicConstraint con;
      con.scope = edge;
      con.forbidden.assign(edge.size(), colour);
      cons.push_back(std::move(con));
    }
  }
  return build_formula(n, std::vector<int32_t>(n, q), std::move(cons));
}

// Alphabet sizes drawn uniformly from [lo_fraction*q, q], at least 1.
inline ProjectionScheme random_scheme(const CspFormula& formula, double lo_fraction, Rng& rng) {
  std::vector<int32_t> s(formula.num_vars());
  for (int v = 0; v < formula.num_vars(); ++v) {
    const int32_t q = formula.domain_size(v);
    const int32_t lo = std::max<int32_t>(1, static_cast<int32_t>(lo_fraction * q));
    s[v] = lo + static_cast<int32_t>(rng.below(static_cast<uint64_t>(q - lo + 1)));
  }
  return ProjectionScheme(formula.domain_sizes(), std::move(s));
}

}  // namespace testgen
