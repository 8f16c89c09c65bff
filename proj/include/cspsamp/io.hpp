#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cspsamp/formula.hpp"
#include "cspsamp/sampler.hpp"

namespace cspsamp {

// Parsed instance plus the source-level structure needed to serialise it
// back and to drive the class-specific regime checks.
struct InstanceDocument {
  InstanceClass cls = InstanceClass::general;
  CspFormula formula;

  // cnf: clauses after dedup/tautology removal, as DIMACS literals
  std::vector<std::vector<int32_t>> clauses;
  int cnf_k = 0;  // max clause width
  int cnf_d = 0;  // max clauses through one variable

  // coloring: hyperedges as 0-based vertex lists, q colours per edge
  std::vector<std::vector<int32_t>> edges;
  int hyp_q = 0;
  int hyp_k_min = 0;
  int hyp_k_max = 0;
  int hyp_Delta = 0;

  std::vector<std::string> warnings;  // e.g. dropped tautological clauses
};

// DIMACS: "p cnf <vars> <clauses>", 'c' comment lines, clauses are signed
// 1-based literals terminated by 0 (may span lines). Duplicate literals in a
// clause are dropped; tautological clauses are dropped with a warning; an
// all-zero clause raises EmptyClause. Each kept clause becomes one atomic
// constraint forbidding the unique falsifying point of the clause.
InstanceDocument parse_dimacs_cnf(std::string_view text);

// "p hyp <vertices> <edges> <colours>", '#' comment lines, one edge per line
// as 1-based vertices. Repeated vertices in an edge raise ParseError,
// out-of-range ones VertexOutOfRange. Each edge yields one constraint per
// colour forbidding the monochromatic tuple.
InstanceDocument parse_hypergraph(std::string_view text);

// "p acsp <vars>" then "d q_1 ... q_n" then one "c v:a ..." line per atomic
// constraint (1-based variables, 0-based values), '#' comment lines.
InstanceDocument parse_atomic_csp(std::string_view text);

// Dispatches on the "p cnf" / "p hyp" / "p acsp" header.
InstanceDocument parse_instance(std::string_view text);

std::string serialize_instance(const InstanceDocument& doc);

// "s s_1 ... s_n" line.
std::string serialize_scheme(const std::vector<int32_t>& alphabet_sizes);
std::vector<int32_t> parse_scheme(std::string_view text, int num_vars);

std::string emit_samples_lines(const std::vector<Assignment>& samples);

// {"samples": [...], "metadata": {seed, samples, schedule, exceptions}}
std::string emit_samples_json(const std::vector<Assignment>& samples,
                              const SamplerSchedule& schedule, int64_t giant_exceptions,
                              int64_t overflow_exceptions);

std::string schedule_to_json(const SamplerSchedule& schedule);

}  // namespace cspsamp
