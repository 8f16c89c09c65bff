#pragma once

#include <cstdint>
#include <string>

#include "cspsamp/formula.hpp"
#include "cspsamp/sampler.hpp"

namespace cspsamp {

// One tractability inequality, evaluated in log2 and reported in bits.
// margin_bits = lhs_bits - rhs_bits; pass means margin_bits >= 0. A zero D
// contributes nothing to the right-hand side.
struct RegimeReport {
  bool pass = false;
  double lhs_bits = 0;
  double rhs_bits = 0;
  double margin_bits = 0;
  std::string inequality;

  // Coloring only: the closed form usable once k >= 30, where
  // (7k)^{9/(k-12)} <= 15 so q >= 15*Delta^{9/(k-12)} + 650 suffices.
  bool simplified_applicable = false;
  bool simplified_pass = false;
  double simplified_threshold = 0;
};

// General atomic CSPs: ln(1/p) >= 350 ln D + 3 ln(1/zeta), zeta in (0, 2^-400].
RegimeReport check_general(double log2_inv_p, int64_t D, double zeta);

// Hypergraph colourings: k >= 13 and q >= max((7 k Delta)^{9/(k-12)}, 650).
RegimeReport check_coloring(int64_t k, int64_t Delta, int64_t q);

// Bounded-degree CNF: k >= 13 log2 d + 13 log2 k + 3 log2(1/zeta),
// zeta in (0, 2^-20].
RegimeReport check_cnf(int64_t k, int64_t d, double zeta);

struct AlphaBeta {
  double alpha = 0;
  double beta = 0;
};

// (0.994, 0.577) general; (7/9, 2/3) coloring; (21/25, 1/2) cnf.
AlphaBeta default_alpha_beta(InstanceClass cls);

// 2^-400 general, 2^-20 cnf; coloring has no zeta (eta is direct).
double default_zeta(InstanceClass cls);

// eta = zeta/3 (general), 1/(2^9 (q k Delta)^4) (coloring),
// zeta/(3 d^4 k^4) (cnf).
double class_eta(const ClassProfile& profile);

// Which scheme constructor the instance shape admits at (alpha, beta).
struct ConstructorPrecondition {
  bool applicable = false;  // shape requirements hold (homogeneity, widths)
  bool pass = false;        // numeric inequality holds too
  double margin_bits = 0;
  std::string detail;
};

struct PreconditionReport {
  ConstructorPrecondition interval;  // 7 <= q^{(a+b)/2} <= q/6, log2 q >= 1/(a-b)
  ConstructorPrecondition marking;   // k >= (2 ln2/(a-b)^2) log2(2ekd)
  ConstructorPrecondition general;   // log2(1/p) >= 25/(a-b)^3 (log2 D + 3)
  const char* recommended = "none";  // first passing constructor, class-biased
};

PreconditionReport check_projection_precondition(InstanceClass cls, const FormulaStats& stats,
                                                 double alpha, double beta);

}  // namespace cspsamp
