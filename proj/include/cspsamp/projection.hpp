#pragma once

#include <cstdint>
#include <vector>

#include "cspsamp/formula.hpp"
#include "cspsamp/rng.hpp"

namespace cspsamp {

// Per-variable surjection h_v from {0..q_v-1} onto the compressed alphabet
// {0..s_v-1}, realised as consecutive intervals: the first (q_v mod s_v)
// intervals have size ceil(q_v/s_v), the rest size floor(q_v/s_v). Every
// fibre therefore has one of the two balanced sizes, and evaluation and
// inversion are O(1) index arithmetic.
class ProjectionScheme {
 public:
  ProjectionScheme(std::vector<int32_t> domain_sizes, std::vector<int32_t> alphabet_sizes);

  int num_vars() const { return static_cast<int>(domain_sizes_.size()); }
  int32_t domain_size(int v) const { return domain_sizes_[v]; }
  int32_t alphabet_size(int v) const { return alphabet_sizes_[v]; }
  const std::vector<int32_t>& alphabet_sizes() const { return alphabet_sizes_; }
  const std::vector<int32_t>& domain_sizes() const { return domain_sizes_; }

  Value evaluate(int v, Value x) const;                 // h_v(x)
  Value preimage_begin(int v, Value y) const;           // first x with h_v(x)=y
  int32_t preimage_size(int v, Value y) const;
  Value invert(int v, Value y, Rng& rng) const;         // uniform over the fibre

  std::vector<Value> project(const Assignment& x) const;

 private:
  std::vector<int32_t> domain_sizes_;
  std::vector<int32_t> alphabet_sizes_;
};

// Per-constraint bit budgets behind the two entropy inequalities: with
// ceil_bits = sum log2 ceil(q_v/s_v) and floor_bits = sum log2 floor(q_v/s_v)
// over the scope, a scheme is admissible at (alpha, beta) when
// ceil_bits <= alpha * domain_bits and floor_bits >= beta * domain_bits for
// every constraint. Comparisons carry a 1e-9 additive tolerance.
struct EntropyReport {
  struct PerConstraint {
    double ceil_bits = 0;
    double floor_bits = 0;
    double domain_bits = 0;
    bool upper_ok = true;
    bool lower_ok = true;
  };
  std::vector<PerConstraint> constraints;
  double alpha = 0;
  double beta = 0;
  bool pass = true;
};

EntropyReport verify_entropy_criterion(const CspFormula& formula, const ProjectionScheme& scheme,
                                       double alpha, double beta);

// Homogeneous-domain scheme with the same alphabet size
// s = ceil(q^{(2-alpha-beta)/2}) everywhere. Requires 7 <= q^{(alpha+beta)/2}
// <= q/6 and log2 q >= 1/(alpha-beta); PreconditionViolated names the failed
// inequality. check_preconditions=false skips the numeric gate.
ProjectionScheme construct_interval_scheme(const CspFormula& formula, double alpha, double beta,
                                           bool check_preconditions = true);

// Uniform-width, homogeneous-domain scheme that keeps a marked subset of
// variables exact (s_v = q_v) and collapses the rest (s_v = 1). Marks are
// drawn i.i.d. with probability (2-alpha-beta)/2 and repaired by resampling
// the marks of the lowest-indexed constraint whose count t_c of unmarked
// variables leaves [ceil((1-alpha)k), floor((1-beta)k)]. Each attempt is
// capped at ceil(4n/k) resampling steps and ceil(log2(1/fail_probability))
// attempts are made before ConstructionFailed.
ProjectionScheme construct_marking_scheme(const CspFormula& formula, double alpha, double beta,
                                          double fail_probability, Rng& rng);

// Mixed-domain scheme: variables with log2 q_v >= 5/(alpha-beta) get the
// deterministic interval size ceil(q_v^{(2-alpha-beta)/2}); the remaining
// variables are marked exactly as in construct_marking_scheme, with the bad
// event per constraint being failure of either entropy inequality. Gate:
// log2(1/p) >= 25/(alpha-beta)^3 * (log2 D + 3), skipped when
// check_preconditions=false.
ProjectionScheme construct_general_scheme(const CspFormula& formula, double alpha, double beta,
                                          double fail_probability, Rng& rng,
                                          bool check_preconditions = true);

// Componentwise image of the forbidden tuple.
std::vector<Value> project_forbidden(const AtomicConstraint& constraint,
                                     const ProjectionScheme& scheme);

// Image formula on the compressed alphabet: one atomic constraint per
// original constraint, forbidding the projected tuple. A compressed
// assignment avoiding it leaves every original constraint satisfiable inside
// its fibre.
CspFormula build_projected_formula(const CspFormula& formula, const ProjectionScheme& scheme);

// Margin diagnostics for the image formula against a caller-chosen local
// lemma budget A*ln(D) + B (B in nats). The image inequality compares the
// worst fibre-mass of a projected tuple against (1-alpha) times the budget;
// the conditional inequality compares the worst single-fibre mass
// (floor(q_v/s_v) sizes) against beta times the budget.
struct ImageLllReport {
  double image_bits = 0;        // min over c of -log2 prod |fibre(tau_v)|/q_v
  double conditional_bits = 0;  // min over c of sum log2 floor(q_v/s_v)
  double budget_nats = 0;       // A*ln(D) + B
  bool image_ok = true;         // image_bits*ln2 > (1-alpha)*budget
  bool conditional_ok = true;   // conditional_bits*ln2 > beta*budget
};

ImageLllReport check_image_lll_margins(const CspFormula& formula, const ProjectionScheme& scheme,
                                       double alpha, double beta, double A, double B);

}  // namespace cspsamp
