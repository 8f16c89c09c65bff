#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cspsamp/formula.hpp"
#include "cspsamp/projection.hpp"
#include "cspsamp/rng.hpp"

namespace cspsamp {

enum class SamplerMode { strict, forced };
enum class InstanceClass { general, coloring, cnf };

// Numbers the schedule formulas need beyond FormulaStats. zeta drives eta for
// the general and cnf classes; (q, k, Delta) drive it for coloring.
struct ClassProfile {
  InstanceClass cls = InstanceClass::general;
  double zeta = 0;
  int64_t k = 0;      // constraint width (cnf, coloring)
  int64_t d = 0;      // max constraints per variable (cnf)
  int64_t q = 0;      // colour count (coloring)
  int64_t Delta = 0;  // max edges per vertex (coloring)
};

struct ScheduleOverrides {
  std::optional<int64_t> T;
  std::optional<double> eta;
  std::optional<double> delta;
  std::optional<int64_t> R;
  std::optional<int64_t> L;
};

// Derived chain parameters. Defaults:
//   T     = ceil(2n * log2(n/eps))
//   delta = eps / (4(T+1))          (uses the actual T, overridden or not)
//   eta   = class formula (zeta/3; 1/(2^9 (qk Delta)^4); zeta/(3 d^4 k^4))
//   R     = ceil(10 * (n/delta)^eta * log2(n/delta)), at least 1
//   L     = ceil(2D * log2(nD/delta)), at least 1
// Ceilings are applied once, to the full product. Overridden fields are
// recorded verbatim.
struct SamplerSchedule {
  double eps = 0;
  int64_t T = 0;
  double delta = 0;
  double eta = 0;
  int64_t R = 1;
  int64_t L = 1;
  uint64_t seed = 0;
  SamplerMode mode = SamplerMode::strict;
  bool T_overridden = false;
  bool eta_overridden = false;
  bool delta_overridden = false;
  bool R_overridden = false;
  bool L_overridden = false;
};

// Strict mode checks the class regime inequality first and throws
// RegimeViolated (message names the inequality) when it fails; forced mode
// derives the same numbers without the gate.
SamplerSchedule derive_schedule(const FormulaStats& stats, const ClassProfile& profile,
                                double eps, SamplerMode mode, uint64_t seed,
                                const ScheduleOverrides& overrides = {});

// Compressed configuration known on a subset of the variables.
struct PartialProjectedConfig {
  std::vector<Value> values;
  std::vector<uint8_t> known;

  static PartialProjectedConfig full(std::vector<Value> y);
  static PartialProjectedConfig all_but(std::vector<Value> y, int v);
  static PartialProjectedConfig none(int n);

  int num_vars() const { return static_cast<int>(values.size()); }
};

// TRUE iff some known position of y pins the constraint's image away from its
// projected forbidden tuple; a constraint with no known scope variable counts
// as not satisfied.
bool is_satisfied_by_projection(const AtomicConstraint& constraint,
                                const std::vector<Value>& projected_forbidden,
                                const PartialProjectedConfig& y);

enum class SampleException : uint8_t { none, giant_component, rejection_overflow };

const char* to_string(SampleException e);

// Draw restricted to the requested variables, plus the work counters used by
// the per-step cost checks. exception != none means the values were redrawn
// from the plain product distribution over the full domains.
struct SampleOutcome {
  std::vector<Value> values;  // parallel to the S passed in
  SampleException exception = SampleException::none;
  int32_t components = 0;
  int64_t trials = 0;
  int64_t constraints_scanned = 0;
};

struct Component {
  std::vector<int32_t> vars;         // ascending
  std::vector<int32_t> constraints;  // discovery order
};

struct FactorizeResult {
  std::vector<Component> components;
  bool giant = false;
  int64_t constraints_scanned = 0;
};

struct RunReport {
  Assignment assignment;
  int64_t steps = 0;
  int64_t giant_exceptions = 0;
  int64_t overflow_exceptions = 0;
  int64_t trials_total = 0;
  int64_t constraints_scanned = 0;
  double wall_seconds = 0;  // excluded from determinism comparisons
  SamplerSchedule schedule;
};

// Scratch buffers reused across calls; one per chain.
class SamplerWorkspace {
 public:
  void resize(int num_vars, int num_constraints);

 private:
  friend class Sampler;
  std::vector<int32_t> var_epoch_, con_epoch_;
  int32_t epoch_ = 0;
  std::vector<int32_t> var_stack_;
  std::vector<Value> draw_;
  FactorizeResult factor_;
};

// Glauber dynamics on the compressed configuration, with the conditional
// updates realised by component-factorised rejection sampling and inverted
// back through the scheme.
class Sampler {
 public:
  Sampler(const CspFormula& formula, const ProjectionScheme& scheme, SamplerSchedule schedule);

  const SamplerSchedule& schedule() const { return schedule_; }
  const CspFormula& formula() const { return formula_; }
  const ProjectionScheme& scheme() const { return scheme_; }
  const DependencyGraph& dependency_graph() const { return graph_; }

  // Connected components of the constraints not already satisfied by y,
  // restricted to those meeting a variable of S, with untouched variables of
  // S kept as singleton components. Aborts with giant=true as soon as a
  // component holds more than schedule.L constraints.
  const FactorizeResult& factorize(const PartialProjectedConfig& y, std::span<const int32_t> S,
                                   SamplerWorkspace& ws) const;

  // Up to R attempts drawing every component variable (fibre-uniform where y
  // is known, domain-uniform otherwise) until no component constraint is
  // violated. Returns trials used, or nullopt after R failures; accepted
  // values land in ws draw buffer.
  std::optional<int64_t> rejection_sample_component(const Component& comp,
                                                    const PartialProjectedConfig& y, int64_t R,
                                                    Rng& rng, SamplerWorkspace& ws) const;

  SampleOutcome inverse_sample(const PartialProjectedConfig& y, std::span<const int32_t> S,
                               Rng& rng, SamplerWorkspace& ws) const;
  SampleOutcome inverse_sample(const PartialProjectedConfig& y, std::span<const int32_t> S,
                               Rng& rng) const;

  RunReport run_glauber(Rng& rng) const;

  // N independent chains; chain i is seeded with
  // Rng::stream_seed(schedule.seed, i), so reports are identical for every
  // worker count.
  std::vector<RunReport> run_many(int64_t num_chains, int workers) const;

 private:
  CspFormula formula_;
  ProjectionScheme scheme_;
  SamplerSchedule schedule_;
  DependencyGraph graph_;
  std::vector<std::vector<Value>> projected_forbidden_;
};

}  // namespace cspsamp
