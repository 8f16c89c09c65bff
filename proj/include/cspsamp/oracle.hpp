#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cspsamp/formula.hpp"
#include "cspsamp/projection.hpp"
#include "cspsamp/rng.hpp"
#include "cspsamp/sampler.hpp"

namespace cspsamp {

// Every satisfying assignment, found by backtracking in variable-index order
// with values ascending, so the list is lexicographically sorted and the
// order is reproducible. Probabilities downstream are exact rationals
// count/total.
struct ExactDistributions {
  std::vector<int32_t> domain_sizes;
  std::vector<Assignment> solutions;

  int num_vars() const { return static_cast<int>(domain_sizes.size()); }
  int64_t count() const { return static_cast<int64_t>(solutions.size()); }
};

// Throws BudgetExceeded when the product state space exceeds `budget`
// (default 1e7 states).
ExactDistributions enumerate_solutions(const CspFormula& formula, int64_t budget = 10'000'000);

// Mixed-radix codes with variable 0 least significant; radix r_v per
// variable.
int64_t encode_tuple(std::span<const Value> values, std::span<const int32_t> radices);
std::vector<Value> decode_tuple(int64_t code, std::span<const int32_t> radices);

// Sparse distribution as (code, count) sorted by code; probabilities are
// count/total.
struct CountTable {
  std::vector<std::pair<int64_t, int64_t>> entries;
  int64_t total = 0;
  std::vector<int32_t> radices;

  int64_t count_of(int64_t code) const;
};

// Pushforward of the uniform solution distribution through the scheme.
CountTable exact_projected(const ExactDistributions& oracle, const ProjectionScheme& scheme);

// Distribution of the solution restricted to S, conditioned on the projected
// image agreeing with y on its known positions. Codes run over the S-tuple
// with the domain radices in S order. Throws EmptySupport when no solution
// matches.
CountTable exact_conditional(const ExactDistributions& oracle, const ProjectionScheme& scheme,
                             const PartialProjectedConfig& y, std::span<const int32_t> S);

// One uniform draw from a count table (by code) or from the solution list.
int64_t sample_exact(const CountTable& table, Rng& rng);
const Assignment& sample_exact(const ExactDistributions& oracle, Rng& rng);

// Single-site chain on the support of the projected solution distribution:
// P(y -> y[v:=c]) = (1/n) * nu(c | y off v). Rows are sparse over the
// support; states are projected codes in sorted order. Throws
// TooLargeToEnumerate when the support exceeds max_states and NoSolutions on
// an empty support.
struct GlauberMatrix {
  std::vector<int64_t> state_codes;                       // sorted
  std::vector<double> pi;                                 // nu as doubles
  std::vector<std::vector<std::pair<int32_t, double>>> rows;  // (state idx, prob)

  double max_row_sum_error() const;           // max |row sum - 1|
  double max_detailed_balance_error() const;  // max |pi_i P_ij - pi_j P_ji|
  double stationary_residual() const;         // max |(pi P - pi)_j|
};

GlauberMatrix exact_glauber_matrix(const ExactDistributions& oracle,
                                   const ProjectionScheme& scheme, int64_t max_states = 10'000);

// Empirical-vs-exact comparison: total variation plus Pearson chi-square
// with df = |exact support| - 1. Empirical mass on codes outside the exact
// support makes the statistic infinite. Throws SampleSizeZero when the
// empirical counts are empty.
struct DistanceReport {
  double tv = 0;
  double chi_square = 0;
  double p_value = 0;
  int64_t df = 0;
  int64_t sample_size = 0;
};

DistanceReport tv_distance(const std::vector<std::pair<int64_t, int64_t>>& empirical,
                           const CountTable& exact);

// Upper tail of the chi-square distribution via the regularised incomplete
// gamma function.
double chi_square_pvalue(double statistic, double dof);

}  // namespace cspsamp
