#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "cspsamp/projection.hpp"
#include "support/generators.hpp"

using namespace cspsamp;

namespace {

ProjectionScheme single(int32_t q, int32_t s) { return ProjectionScheme({q}, {s}); }

CspFormula homogeneous_formula(int n, int32_t q, int width) {
  std::vector<AtomicConstraint> cons;
  AtomicConstraint c;
  for (int i = 0; i < width; ++i) {
    c.scope.push_back(i);
    c.forbidden.push_back(0);
  }
  cons.push_back(c);
  return build_formula(n, std::vector<int32_t>(n, q), cons);
}

}  // namespace

TEST_SUITE("projection") {
  TEST_CASE("balanced fibres of 650 over 7 symbols") {
    const ProjectionScheme h = single(650, 7);
    // 650 = 6*93 + 1*92
    for (Value y = 0; y < 6; ++y) CHECK(h.preimage_size(0, y) == 93);
    CHECK(h.preimage_size(0, 6) == 92);
    int32_t total = 0;
    for (Value y = 0; y < 7; ++y) total += h.preimage_size(0, y);
    CHECK(total == 650);
  }

  TEST_CASE("interval evaluation on small hand cases") {
    CHECK(single(9, 3).evaluate(0, 5) == 1);
    const ProjectionScheme h = single(7, 3);  // fibre sizes 3,2,2
    const std::vector<Value> expected{0, 0, 0, 1, 1, 2, 2};
    for (Value x = 0; x < 7; ++x) CHECK(h.evaluate(0, x) == expected[x]);
  }

  TEST_CASE("identity and full collapse") {
    const ProjectionScheme id = single(5, 5);
    for (Value x = 0; x < 5; ++x) {
      CHECK(id.evaluate(0, x) == x);
      CHECK(id.preimage_size(0, x) == 1);
    }
    const ProjectionScheme flat = single(5, 1);
    for (Value x = 0; x < 5; ++x) CHECK(flat.evaluate(0, x) == 0);
    CHECK(flat.preimage_size(0, 0) == 5);
  }

  TEST_CASE("fibres partition the domain into consecutive runs") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
      const int32_t q = 1 + static_cast<int32_t>(rng.below(300));
      const int32_t s = 1 + static_cast<int32_t>(rng.below(static_cast<uint64_t>(q)));
      const ProjectionScheme h({q}, {s});
      int32_t covered = 0;
      Value prev = 0;
      for (Value y = 0; y < s; ++y) {
        const Value begin = h.preimage_begin(0, y);
        const int32_t size = h.preimage_size(0, y);
        CHECK(begin == covered);
        CHECK(size >= q / s);
        CHECK(size <= (q + s - 1) / s);
        for (Value x = begin; x < begin + size; ++x) CHECK(h.evaluate(0, x) == y);
        covered += size;
        if (y > 0) CHECK(h.evaluate(0, begin) >= prev);
        prev = y;
      }
      CHECK(covered == q);
    }
  }

  TEST_CASE("invert lands in the fibre and covers it") {
    Rng rng(7);
    const ProjectionScheme h = single(11, 4);  // fibres 3,3,3,2
    for (Value y = 0; y < 4; ++y) {
      std::set<Value> seen;
      for (int i = 0; i < 200; ++i) {
        const Value x = h.invert(0, y, rng);
        CHECK(h.evaluate(0, x) == y);
        seen.insert(x);
      }
      CHECK(static_cast<int32_t>(seen.size()) == h.preimage_size(0, y));
    }
  }

  TEST_CASE("projection argument validation") {
    CHECK_THROWS_AS(ProjectionScheme({4, 4}, {2}), PreconditionViolated);
    CHECK_THROWS_AS(ProjectionScheme({4}, {0}), PreconditionViolated);
    CHECK_THROWS_AS(ProjectionScheme({4}, {5}), PreconditionViolated);
    const ProjectionScheme h = single(4, 2);
    CHECK_THROWS_AS(h.evaluate(0, 4), ValueOutOfDomain);
    CHECK_THROWS_AS(h.evaluate(0, -1), ValueOutOfDomain);
    CHECK_THROWS_AS(h.preimage_size(0, 2), SymbolOutOfAlphabet);
    Rng rng(1);
    CHECK_THROWS_AS(h.invert(0, 3, rng), SymbolOutOfAlphabet);
    CHECK_THROWS_AS(h.project({}), IncompleteAssignment);
    CHECK_THROWS_AS(h.project({1, 2}), IncompleteAssignment);
  }

  TEST_CASE("entropy budgets on a hand-checked case") {
    const CspFormula f = homogeneous_formula(2, 4, 2);
    const ProjectionScheme h({4, 4}, {2, 2});
    const EntropyReport rep = verify_entropy_criterion(f, h, 0.6, 0.5);
    REQUIRE(rep.constraints.size() == 1);
    CHECK(rep.constraints[0].ceil_bits == doctest::Approx(2.0));
    CHECK(rep.constraints[0].floor_bits == doctest::Approx(2.0));
    CHECK(rep.constraints[0].domain_bits == doctest::Approx(4.0));
    CHECK(rep.pass);

    // raising beta past 1/2 breaks the lower inequality: 2 < 0.51*4
    CHECK_FALSE(verify_entropy_criterion(f, h, 0.6, 0.51).pass);
    // equality passes through the tolerance: 2 <= 0.5*4
    CHECK(verify_entropy_criterion(f, h, 0.51, 0.5).pass);
  }

  TEST_CASE("entropy criterion rejects lopsided alphabets") {
    const CspFormula f = homogeneous_formula(2, 4, 2);
    // s=3 gives fibres 2,1,1: ceil_bits=2 but floor_bits=0
    const EntropyReport rep = verify_entropy_criterion(f, ProjectionScheme({4, 4}, {3, 3}),
                                                       0.6, 0.25);
    CHECK(rep.constraints[0].floor_bits == doctest::Approx(0.0));
    CHECK_FALSE(rep.pass);
  }

  TEST_CASE("interval constructor picks the canonical alphabet size") {
    const CspFormula f = homogeneous_formula(3, 650, 2);
    const double alpha = 7.0 / 9.0, beta = 2.0 / 3.0;
    const ProjectionScheme h = construct_interval_scheme(f, alpha, beta);
    // ceil(650^(5/18)) = 7
    for (int v = 0; v < 3; ++v) CHECK(h.alphabet_size(v) == 7);
    CHECK(verify_entropy_criterion(f, h, alpha, beta).pass);
  }

  TEST_CASE("interval constructor enforces its preconditions") {
    const double alpha = 7.0 / 9.0, beta = 2.0 / 3.0;
    CHECK_THROWS_AS(construct_interval_scheme(homogeneous_formula(2, 6, 2), alpha, beta),
                    PreconditionViolated);
    // mixed domains are out of shape regardless of the numeric gate
    AtomicConstraint c;
    c.scope = {0, 1};
    c.forbidden = {0, 0};
    const CspFormula mixed = build_formula(2, {650, 651}, {c});
    CHECK_THROWS_AS(construct_interval_scheme(mixed, alpha, beta), PreconditionViolated);
    // forced construction skips the numeric gate but keeps the shape check
    const ProjectionScheme forced =
        construct_interval_scheme(homogeneous_formula(2, 6, 2), alpha, beta, false);
    CHECK(forced.alphabet_size(0) >= 1);
    CHECK_THROWS_AS(construct_interval_scheme(mixed, alpha, beta, false), PreconditionViolated);
  }

  TEST_CASE("invalid alpha beta pairs are rejected everywhere") {
    const CspFormula f = homogeneous_formula(2, 4, 2);
    const ProjectionScheme h({4, 4}, {2, 2});
    CHECK_THROWS_AS(verify_entropy_criterion(f, h, 0.5, 0.5), InvalidAlphaBeta);
    CHECK_THROWS_AS(verify_entropy_criterion(f, h, 0.4, 0.5), InvalidAlphaBeta);
    CHECK_THROWS_AS(construct_interval_scheme(f, 1.0, 0.5), InvalidAlphaBeta);
    Rng rng(1);
    CHECK_THROWS_AS(construct_marking_scheme(f, 0.5, 0.5, 0.01, rng), InvalidAlphaBeta);
  }

  TEST_CASE("marking keeps every constraint's tracked count inside the window") {
    Rng rng(11);
    const double alpha = 21.0 / 25.0, beta = 0.5;
    for (int trial = 0; trial < 10; ++trial) {
      const CspFormula f = testgen::random_cnf(100, 8, 20, rng);
      const ProjectionScheme h = construct_marking_scheme(f, alpha, beta, 1e-4, rng);
      const int64_t lo = 4, hi = 10;  // ceil(0.16*20), floor(0.5*20)
      for (const AtomicConstraint& c : f.constraints()) {
        int64_t tracked = 0;
        for (int32_t v : c.scope) {
          const int32_t s = h.alphabet_size(v);
          CHECK((s == 1 || s == f.domain_size(v)));
          tracked += s == f.domain_size(v) ? 1 : 0;
        }
        CHECK(tracked >= lo);
        CHECK(tracked <= hi);
      }
      CHECK(verify_entropy_criterion(f, h, alpha, beta).pass);
    }
  }

  TEST_CASE("marking without constraints accepts any draw") {
    Rng rng(3);
    const CspFormula f = build_formula(5, {3, 3, 3, 3, 3}, {});
    const ProjectionScheme h = construct_marking_scheme(f, 0.8, 0.5, 0.01, rng);
    for (int v = 0; v < 5; ++v) CHECK((h.alphabet_size(v) == 1 || h.alphabet_size(v) == 3));
  }

  TEST_CASE("marking rejects non-uniform shapes") {
    Rng rng(4);
    AtomicConstraint c1, c2;
    c1.scope = {0, 1};
    c1.forbidden = {0, 0};
    c2.scope = {0};
    c2.forbidden = {1};
    const CspFormula f = build_formula(2, {2, 2}, {c1, c2});
    CHECK_THROWS_AS(construct_marking_scheme(f, 0.8, 0.5, 0.01, rng), PreconditionViolated);

    AtomicConstraint c3;
    c3.scope = {0, 1};
    c3.forbidden = {0, 0};
    const CspFormula g = build_formula(2, {2, 3}, {c3});
    CHECK_THROWS_AS(construct_marking_scheme(g, 0.8, 0.5, 0.01, rng), PreconditionViolated);
  }

  TEST_CASE("marking gives up when the window is empty") {
    Rng rng(5);
    const CspFormula f = homogeneous_formula(4, 2, 3);
    // (1-alpha)k = 0.3 -> lo 1, (1-beta)k = 0.6 -> hi 0: impossible
    CHECK_THROWS_AS(construct_marking_scheme(f, 0.9, 0.8, 0.5, rng), ConstructionFailed);
  }

  TEST_CASE("general constructor is deterministic when every domain is large") {
    // width-80 constraint over 13-bit domains clears the gate:
    // 80*13 = 1040 >= 25/(0.417)^3 * 3 ~ 1034
    const double alpha = 0.994, beta = 0.577;
    const CspFormula f = homogeneous_formula(80, 8192, 80);
    Rng a(9), b(9);
    const ProjectionScheme h = construct_general_scheme(f, alpha, beta, 1e-4, a);
    CHECK(a.next() == b.next());  // no randomness consumed
    for (int v = 0; v < 80; ++v) CHECK(h.alphabet_size(v) == 7);  // ceil(8192^0.2145)
    CHECK(verify_entropy_criterion(f, h, alpha, beta).pass);
  }

  TEST_CASE("general constructor gates on the violation probability") {
    const CspFormula f = homogeneous_formula(3, 8192, 3);  // 39 bits, far below the budget
    Rng rng(10);
    CHECK_THROWS_AS(construct_general_scheme(f, 0.994, 0.577, 1e-4, rng), PreconditionViolated);
    // forced construction still yields an admissible scheme here
    const ProjectionScheme h = construct_general_scheme(f, 0.994, 0.577, 1e-4, rng, false);
    CHECK(verify_entropy_criterion(f, h, 0.994, 0.577).pass);
  }

  TEST_CASE("general constructor marks small domains") {
    // two-block scopes: 14-bit large vars carry the entropy budget, boolean
    // small vars must end up all-or-nothing
    const double alpha = 0.9, beta = 0.15;
    std::vector<int32_t> domains;
    std::vector<AtomicConstraint> cons;
    const int large_per = 13, small_per = 4;  // 13*14+4 bits clears the degree budget
    for (int c = 0; c < 3; ++c) {
      AtomicConstraint con;
      for (int i = 0; i < large_per; ++i) {
        con.scope.push_back(static_cast<int32_t>(domains.size()));
        con.forbidden.push_back(0);
        domains.push_back(16384);
      }
      for (int i = 0; i < small_per; ++i) {
        con.scope.push_back(static_cast<int32_t>(domains.size()));
        con.forbidden.push_back(0);
        domains.push_back(2);
      }
      cons.push_back(con);
    }
    const CspFormula f = build_formula(static_cast<int>(domains.size()), domains, cons);
    Rng rng(12);
    const ProjectionScheme h = construct_general_scheme(f, alpha, beta, 1e-4, rng);
    for (int v = 0; v < f.num_vars(); ++v) {
      if (f.domain_size(v) == 2)
        CHECK((h.alphabet_size(v) == 1 || h.alphabet_size(v) == 2));
      else
        CHECK(h.alphabet_size(v) > 1);
    }
    CHECK(verify_entropy_criterion(f, h, alpha, beta).pass);
  }

  TEST_CASE("projected forbidden tuples follow the componentwise image") {
    AtomicConstraint c;
    c.scope = {0, 1};
    c.forbidden = {5, 0};
    const ProjectionScheme h({9, 2}, {3, 1});
    CHECK(project_forbidden(c, h) == std::vector<Value>{1, 0});
  }

  TEST_CASE("image formula forbids exactly the reachable violations") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
      const CspFormula f = testgen::random_acsp(4, 4, 2, 6, 1, 3, rng);
      const ProjectionScheme h = testgen::random_scheme(f, 0.3, rng);
      const CspFormula img = build_projected_formula(f, h);
      REQUIRE(img.num_constraints() == f.num_constraints());
      for (int ci = 0; ci < f.num_constraints(); ++ci) {
        const AtomicConstraint& orig = f.constraint(ci);
        const AtomicConstraint& proj = img.constraint(ci);
        CHECK(proj.scope == orig.scope);
        // a projected tuple is forbidden iff some point of its fibre product
        // equals the original forbidden tuple, which pins every coordinate
        std::vector<Value> y(orig.scope.size(), 0);
        for (;;) {
          bool reachable = true;
          for (size_t i = 0; i < orig.scope.size(); ++i)
            if (h.evaluate(orig.scope[i], orig.forbidden[i]) != y[i]) reachable = false;
          CHECK(reachable == (y == proj.forbidden));
          size_t i = 0;
          while (i < y.size() && ++y[i] == h.alphabet_size(orig.scope[i])) y[i++] = 0;
          if (i == y.size()) break;
        }
      }
    }
  }

  TEST_CASE("image margins behave at the identity scheme") {
    const CspFormula f = homogeneous_formula(2, 4, 2);
    const ProjectionScheme id({4, 4}, {4, 4});
    const ImageLllReport rep = check_image_lll_margins(f, id, 0.6, 0.5, 0.0, 1.0);
    CHECK(rep.image_bits == doctest::Approx(4.0));        // full 1/16 mass
    CHECK(rep.conditional_bits == doctest::Approx(0.0));  // singleton fibres
    CHECK(rep.budget_nats == doctest::Approx(1.0));
    CHECK(rep.image_ok);
    CHECK_FALSE(rep.conditional_ok);
  }
}
