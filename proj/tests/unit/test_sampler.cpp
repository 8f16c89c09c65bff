#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "cspsamp/oracle.hpp"
#include "cspsamp/regimes.hpp"
#include "cspsamp/sampler.hpp"
#include "support/generators.hpp"

using namespace cspsamp;

namespace {

FormulaStats stats_of(int n, int32_t D) {
  FormulaStats st;
  st.num_vars = n;
  st.max_degree = D;
  return st;
}

ClassProfile forced_profile() {
  ClassProfile p;
  p.cls = InstanceClass::general;
  p.zeta = std::ldexp(1.0, -400);
  return p;
}

SamplerSchedule quick_schedule(const CspFormula& f, int64_t R, int64_t L, uint64_t seed,
                               int64_t T = 0) {
  ScheduleOverrides ov;
  ov.R = R;
  ov.L = L;
  ov.T = T;
  return derive_schedule(compute_stats(f), forced_profile(), 0.1, SamplerMode::forced, seed, ov);
}

// three boolean constraints in a path: (0,1), (1,2), (2,3), each forbidding
// the all-zero pair
CspFormula boolean_path() {
  std::vector<AtomicConstraint> cons;
  for (int v = 0; v < 3; ++v) {
    AtomicConstraint c;
    c.scope = {v, v + 1};
    c.forbidden = {0, 0};
    cons.push_back(c);
  }
  return build_formula(4, {2, 2, 2, 2}, cons);
}

ProjectionScheme identity_scheme(const CspFormula& f) {
  return ProjectionScheme(f.domain_sizes(), f.domain_sizes());
}

}  // namespace

TEST_SUITE("sampler") {
  TEST_CASE("schedule arithmetic at n=10, eps=0.05") {
    const SamplerSchedule sch = derive_schedule(stats_of(10, 2), forced_profile(), 0.05,
                                                SamplerMode::forced, 1);
    CHECK(sch.T == 153);  // ceil(20 * log2(200))
    CHECK(sch.delta == 0.05 / (4.0 * 154.0));
    CHECK(sch.eta == std::ldexp(1.0, -400) / 3.0);
    const double base = 10.0 / sch.delta;
    CHECK(sch.R == static_cast<int64_t>(std::ceil(10.0 * std::pow(base, sch.eta) * std::log2(base))));
    CHECK(sch.L == static_cast<int64_t>(std::ceil(4.0 * std::log2(20.0 / sch.delta))));
    CHECK_FALSE(sch.T_overridden);
    CHECK(sch.R >= 1);
    CHECK(sch.L >= 1);
  }

  TEST_CASE("overridden horizon feeds the failure budget") {
    ScheduleOverrides ov;
    ov.T = 5;
    const SamplerSchedule sch = derive_schedule(stats_of(10, 1), forced_profile(), 0.12,
                                                SamplerMode::forced, 1, ov);
    CHECK(sch.T == 5);
    CHECK(sch.T_overridden);
    CHECK(sch.delta == 0.12 / 24.0);
  }

  TEST_CASE("zero dependency degree pins L to one") {
    const SamplerSchedule sch = derive_schedule(stats_of(6, 0), forced_profile(), 0.1,
                                                SamplerMode::forced, 1);
    CHECK(sch.L == 1);
  }

  TEST_CASE("empty formula gets a zero-length horizon") {
    const SamplerSchedule sch = derive_schedule(stats_of(0, 0), forced_profile(), 0.5,
                                                SamplerMode::forced, 1);
    CHECK(sch.T == 0);
    CHECK(sch.delta == 0.5 / 4.0);
    CHECK(sch.R == 1);
  }

  TEST_CASE("strict mode enforces the class regime") {
    ClassProfile cnf;
    cnf.cls = InstanceClass::cnf;
    cnf.zeta = std::ldexp(1.0, -20);
    cnf.k = 3;
    cnf.d = 2;
    FormulaStats st = stats_of(10, 2);
    st.log2_inv_p = 3;
    CHECK_THROWS_AS(derive_schedule(st, cnf, 0.1, SamplerMode::strict, 1), RegimeViolated);
    CHECK_NOTHROW(derive_schedule(st, cnf, 0.1, SamplerMode::forced, 1));
  }

  TEST_CASE("eps must be a probability") {
    CHECK_THROWS_AS(derive_schedule(stats_of(5, 1), forced_profile(), 0.0, SamplerMode::forced, 1),
                    PreconditionViolated);
    CHECK_THROWS_AS(derive_schedule(stats_of(5, 1), forced_profile(), 1.0, SamplerMode::forced, 1),
                    PreconditionViolated);
  }

  TEST_CASE("projection satisfaction needs a known disagreeing coordinate") {
    AtomicConstraint c;
    c.scope = {0, 2};
    c.forbidden = {1, 1};
    const std::vector<Value> tau{1, 1};

    PartialProjectedConfig y = PartialProjectedConfig::none(3);
    CHECK_FALSE(is_satisfied_by_projection(c, tau, y));  // nothing known

    y.known[0] = 1;
    y.values[0] = 1;
    CHECK_FALSE(is_satisfied_by_projection(c, tau, y));  // agrees so far

    y.values[0] = 0;
    CHECK(is_satisfied_by_projection(c, tau, y));

    // known values off the scope are irrelevant
    y.values[0] = 1;
    y.known[1] = 1;
    y.values[1] = 0;
    CHECK_FALSE(is_satisfied_by_projection(c, tau, y));
  }

  TEST_CASE("factorize splits the path instance at a satisfied constraint") {
    const CspFormula f = boolean_path();
    const Sampler sampler(f, identity_scheme(f), quick_schedule(f, 10, 100, 1));
    SamplerWorkspace ws;

    // y = (1,·,0,0): constraint (0,1) is satisfied by y0=1, the others are not
    PartialProjectedConfig y = PartialProjectedConfig::all_but({1, 0, 0, 0}, 1);
    const int32_t S[] = {1};
    const FactorizeResult& fr = sampler.factorize(y, S, ws);
    CHECK_FALSE(fr.giant);
    REQUIRE(fr.components.size() == 1);
    CHECK(fr.components[0].vars == std::vector<int32_t>{1, 2, 3});
    CHECK(fr.components[0].constraints == std::vector<int32_t>{1, 2});
    CHECK(fr.constraints_scanned == 3);  // each constraint evaluated once
  }

  TEST_CASE("factorize keeps untouched seeds as singleton components") {
    const CspFormula f = boolean_path();
    const Sampler sampler(f, identity_scheme(f), quick_schedule(f, 10, 100, 1));
    SamplerWorkspace ws;

    // everything known and safe: all constraints satisfied by y1=1, y2=1
    PartialProjectedConfig y = PartialProjectedConfig::full({0, 1, 1, 0});
    const int32_t S[] = {0, 3};
    const FactorizeResult& fr = sampler.factorize(y, S, ws);
    REQUIRE(fr.components.size() == 2);
    CHECK(fr.components[0].vars == std::vector<int32_t>{0});
    CHECK(fr.components[0].constraints.empty());
    CHECK(fr.components[1].vars == std::vector<int32_t>{3});
  }

  TEST_CASE("factorize merges seeds that share a component") {
    const CspFormula f = boolean_path();
    const Sampler sampler(f, identity_scheme(f), quick_schedule(f, 10, 100, 1));
    SamplerWorkspace ws;
    const PartialProjectedConfig y = PartialProjectedConfig::none(4);
    const int32_t S[] = {0, 3};
    const FactorizeResult& fr = sampler.factorize(y, S, ws);
    REQUIRE(fr.components.size() == 1);  // the path connects both seeds
    CHECK(fr.components[0].vars == std::vector<int32_t>{0, 1, 2, 3});
  }

  TEST_CASE("component growth past L aborts as giant") {
    const CspFormula f = boolean_path();
    const Sampler sampler(f, identity_scheme(f), quick_schedule(f, 10, 1, 1));
    SamplerWorkspace ws;
    const PartialProjectedConfig y = PartialProjectedConfig::none(4);
    const int32_t S[] = {0};
    const FactorizeResult& fr = sampler.factorize(y, S, ws);
    CHECK(fr.giant);

    Rng rng(5);
    const SampleOutcome out = sampler.inverse_sample(y, S, rng);
    CHECK(out.exception == SampleException::giant_component);
    CHECK(out.values.size() == 1);
  }

  TEST_CASE("a zero trial budget overflows on any nonempty component") {
    const CspFormula f = boolean_path();
    const Sampler sampler(f, identity_scheme(f), quick_schedule(f, 0, 100, 1));
    Rng rng(5);
    const int32_t S[] = {1};
    const SampleOutcome out =
        sampler.inverse_sample(PartialProjectedConfig::none(4), S, rng);
    CHECK(out.exception == SampleException::rejection_overflow);
  }

  TEST_CASE("exception draws still return values in range") {
    const CspFormula f = boolean_path();
    const Sampler sampler(f, identity_scheme(f), quick_schedule(f, 0, 100, 1));
    Rng rng(6);
    std::vector<int32_t> all(4);
    std::iota(all.begin(), all.end(), 0);
    for (int i = 0; i < 100; ++i) {
      const SampleOutcome out =
          sampler.inverse_sample(PartialProjectedConfig::none(4), all, rng);
      CHECK(out.exception == SampleException::rejection_overflow);
      for (int v = 0; v < 4; ++v) {
        CHECK(out.values[v] >= 0);
        CHECK(out.values[v] < 2);
      }
    }
  }

  TEST_CASE("inverse sampling matches the exact conditional on a small instance") {
    // one constraint, two booleans, forbid (0,0); nothing known
    AtomicConstraint c;
    c.scope = {0, 1};
    c.forbidden = {0, 0};
    const CspFormula f = build_formula(2, {2, 2}, {c});
    const ProjectionScheme h = identity_scheme(f);
    const Sampler sampler(f, h, quick_schedule(f, 100, 100, 1));
    const ExactDistributions oracle = enumerate_solutions(f);

    const PartialProjectedConfig y = PartialProjectedConfig::none(2);
    const int32_t S[] = {0, 1};
    const CountTable exact = exact_conditional(oracle, h, y, S);
    REQUIRE(exact.entries.size() == 3);

    Rng rng(17);
    SamplerWorkspace ws;
    std::vector<std::pair<int64_t, int64_t>> counts;
    std::vector<int64_t> tally(4, 0);
    for (int i = 0; i < 30000; ++i) {
      const SampleOutcome out = sampler.inverse_sample(y, S, rng, ws);
      REQUIRE(out.exception == SampleException::none);
      ++tally[encode_tuple(out.values, exact.radices)];
    }
    for (int64_t code = 0; code < 4; ++code)
      if (tally[code] > 0) counts.push_back({code, tally[code]});
    const DistanceReport rep = tv_distance(counts, exact);
    CHECK(rep.tv < 0.02);
    CHECK(rep.p_value > 1e-6);
  }

  TEST_CASE("fibre-pinned inversion is deterministic when one point survives") {
    // scheme collapses variable 1; conditioning on y=(0,0) leaves only (0,1)
    AtomicConstraint c;
    c.scope = {0, 1};
    c.forbidden = {0, 0};
    const CspFormula f = build_formula(2, {2, 2}, {c});
    const ProjectionScheme h({2, 2}, {2, 1});
    const Sampler sampler(f, h, quick_schedule(f, 200, 100, 1));
    Rng rng(3);
    const int32_t S[] = {0, 1};
    for (int i = 0; i < 200; ++i) {
      const SampleOutcome out =
          sampler.inverse_sample(PartialProjectedConfig::full({0, 0}), S, rng);
      REQUIRE(out.exception == SampleException::none);
      CHECK(out.values[0] == 0);
      CHECK(out.values[1] == 1);
    }
  }

  TEST_CASE("per-call constraint scans respect the memoized bounds") {
    Rng rng(23);
    for (int trial = 0; trial < 30; ++trial) {
      const CspFormula f = testgen::random_acsp(8, 10, 2, 4, 1, 3, rng);
      const FormulaStats st = compute_stats(f);
      const ProjectionScheme h = testgen::random_scheme(f, 0.4, rng);
      const SamplerSchedule sch = quick_schedule(f, 50, 3, 7);
      const Sampler sampler(f, h, sch);
      SamplerWorkspace ws;

      Assignment x(8);
      for (int v = 0; v < 8; ++v)
        x[v] = static_cast<Value>(rng.below(static_cast<uint64_t>(f.domain_size(v))));
      for (int v = 0; v < 8; ++v) {
        PartialProjectedConfig y = PartialProjectedConfig::all_but(h.project(x), v);
        const int32_t S[] = {v};
        const SampleOutcome out = sampler.inverse_sample(y, S, rng, ws);
        CHECK(out.constraints_scanned <= f.num_constraints());
        CHECK(out.constraints_scanned <= (sch.L + 1) * (st.max_degree + 1));
      }
    }
  }

  TEST_CASE("unconstrained chain outputs the uniform distribution") {
    const CspFormula f = build_formula(3, {3, 3, 3}, {});
    ScheduleOverrides ov;
    ov.T = 10;
    const SamplerSchedule sch = derive_schedule(compute_stats(f), forced_profile(), 0.1,
                                                SamplerMode::forced, 99, ov);
    const Sampler sampler(f, identity_scheme(f), sch);
    const ExactDistributions oracle = enumerate_solutions(f);
    const CountTable exact = exact_projected(oracle, identity_scheme(f));

    std::vector<int64_t> tally(27, 0);
    const std::vector<RunReport> reports = sampler.run_many(100000, 1);
    for (const RunReport& rep : reports) {
      CHECK(rep.giant_exceptions == 0);
      CHECK(rep.overflow_exceptions == 0);
      ++tally[encode_tuple(rep.assignment, exact.radices)];
    }
    std::vector<std::pair<int64_t, int64_t>> counts;
    for (int64_t code = 0; code < 27; ++code)
      if (tally[code] > 0) counts.push_back({code, tally[code]});
    const DistanceReport rep = tv_distance(counts, exact);
    CHECK(rep.p_value > 1e-6);
    CHECK(rep.tv < 0.02);
  }

  TEST_CASE("single run is reproducible from its seed") {
    const CspFormula f = boolean_path();
    const Sampler sampler(f, identity_scheme(f), quick_schedule(f, 50, 100, 41, 25));
    Rng a(13), b(13);
    const RunReport ra = sampler.run_glauber(a);
    const RunReport rb = sampler.run_glauber(b);
    CHECK(ra.assignment == rb.assignment);
    CHECK(ra.trials_total == rb.trials_total);
    CHECK(ra.constraints_scanned == rb.constraints_scanned);
    CHECK(evaluate(f, ra.assignment));
  }

  TEST_CASE("worker count never changes the reports") {
    const CspFormula f = boolean_path();
    const Sampler sampler(f, identity_scheme(f), quick_schedule(f, 50, 100, 77, 30));
    const std::vector<RunReport> serial = sampler.run_many(16, 1);
    const std::vector<RunReport> parallel = sampler.run_many(16, 4);
    REQUIRE(serial.size() == parallel.size());
    for (size_t i = 0; i < serial.size(); ++i) {
      CHECK(serial[i].assignment == parallel[i].assignment);
      CHECK(serial[i].trials_total == parallel[i].trials_total);
      CHECK(serial[i].giant_exceptions == parallel[i].giant_exceptions);
      CHECK(serial[i].overflow_exceptions == parallel[i].overflow_exceptions);
      CHECK(serial[i].constraints_scanned == parallel[i].constraints_scanned);
    }
  }

  TEST_CASE("scheme and formula domains must agree") {
    const CspFormula f = boolean_path();
    const ProjectionScheme wrong({2, 2, 2, 3}, {2, 2, 2, 3});
    CHECK_THROWS_AS(Sampler(f, wrong, quick_schedule(f, 10, 10, 1)), PreconditionViolated);
  }

  TEST_CASE("empty formula runs to an empty assignment") {
    const CspFormula f = build_formula(0, {}, {});
    const Sampler sampler(f, ProjectionScheme({}, {}), quick_schedule(f, 5, 5, 1));
    Rng rng(1);
    const RunReport rep = sampler.run_glauber(rng);
    CHECK(rep.assignment.empty());
    CHECK(rep.steps == 0);
  }
}
