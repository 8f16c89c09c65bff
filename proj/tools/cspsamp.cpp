// Command line front end: check regime inequalities, construct projection
// schemes, draw samples, verify against exact enumeration, benchmark.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cspsamp/io.hpp"
#include "cspsamp/oracle.hpp"
#include "cspsamp/regimes.hpp"
#include "cspsamp/sampler.hpp"

using namespace cspsamp;

namespace {

struct Options {
  std::string input = "-";
  std::string format = "auto";
  std::string output;  // text|json or lines|json
  std::string mode = "strict";
  std::string constructor = "auto";
  std::string scheme_file;
  double eps = 0.1;
  std::optional<double> zeta;
  std::optional<double> log2_zeta;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> eta;
  std::optional<int64_t> T;
  std::optional<int64_t> R;
  std::optional<int64_t> L;
  double fail_prob = 1e-4;
  uint64_t seed = 0;
  int64_t samples = 1;
  int workers = 1;
  int64_t budget = 10'000'000;
  std::string bench_input;  // empty runs the built-in sweep
};

std::string read_input(const std::string& path) {
  std::ostringstream ss;
  if (path == "-") {
    ss << std::cin.rdbuf();
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    ss << in.rdbuf();
  }
  return ss.str();
}

InstanceDocument parse_document(const Options& o) {
  const std::string text = read_input(o.input);
  if (o.format == "cnf") return parse_dimacs_cnf(text);
  if (o.format == "hyp") return parse_hypergraph(text);
  if (o.format == "acsp") return parse_atomic_csp(text);
  return parse_instance(text);
}

const char* class_name(InstanceClass cls) {
  switch (cls) {
    case InstanceClass::general: return "acsp";
    case InstanceClass::coloring: return "hyp";
    case InstanceClass::cnf: return "cnf";
  }
  return "?";
}

double effective_zeta(const Options& o, InstanceClass cls) {
  if (o.zeta) return *o.zeta;
  if (o.log2_zeta) return std::exp2(-*o.log2_zeta);
  return default_zeta(cls);
}

ClassProfile profile_of(const InstanceDocument& doc, const Options& o) {
  ClassProfile p;
  p.cls = doc.cls;
  p.zeta = effective_zeta(o, doc.cls);
  switch (doc.cls) {
    case InstanceClass::cnf:
      p.k = doc.cnf_k;
      p.d = doc.cnf_d;
      break;
    case InstanceClass::coloring:
      p.k = doc.hyp_k_min;
      p.Delta = doc.hyp_Delta;
      p.q = doc.hyp_q;
      break;
    case InstanceClass::general:
      break;
  }
  return p;
}

RegimeReport regime_of(const InstanceDocument& doc, const FormulaStats& stats,
                       const ClassProfile& profile) {
  switch (doc.cls) {
    case InstanceClass::coloring:
      return check_coloring(profile.k, profile.Delta, profile.q);
    case InstanceClass::cnf:
      return check_cnf(profile.k, profile.d, profile.zeta);
    case InstanceClass::general:
      break;
  }
  return check_general(stats.log2_inv_p, stats.max_degree, profile.zeta);
}

AlphaBeta alpha_beta_of(const InstanceDocument& doc, const Options& o) {
  AlphaBeta ab = default_alpha_beta(doc.cls);
  if (o.alpha) ab.alpha = *o.alpha;
  if (o.beta) ab.beta = *o.beta;
  return ab;
}

ProjectionScheme build_scheme(const InstanceDocument& doc, const FormulaStats& stats,
                              const Options& o, Rng& rng) {
  if (!o.scheme_file.empty()) {
    const std::string text = read_input(o.scheme_file);
    return ProjectionScheme(doc.formula.domain_sizes(),
                            parse_scheme(text, doc.formula.num_vars()));
  }

  const AlphaBeta ab = alpha_beta_of(doc, o);
  const bool strict = o.mode == "strict";

  std::string which = o.constructor;
  if (which == "auto") {
    if (strict) {
      const PreconditionReport rep =
          check_projection_precondition(doc.cls, stats, ab.alpha, ab.beta);
      which = rep.recommended;
      if (which == "none")
        throw PreconditionViolated("no scheme constructor precondition holds for this instance");
    } else {
      // shape-based pick, class-biased
      const bool marking_ok =
          stats.homogeneous_domains && stats.uniform_width && stats.max_width >= 1;
      const bool interval_ok = stats.homogeneous_domains;
      switch (doc.cls) {
        case InstanceClass::cnf:
          which = marking_ok ? "marking" : "general";
          break;
        case InstanceClass::coloring:
          which = marking_ok ? "marking" : interval_ok ? "interval" : "general";
          break;
        case InstanceClass::general:
          which = "general";
          break;
      }
    }
  }

  if (which == "interval")
    return construct_interval_scheme(doc.formula, ab.alpha, ab.beta, strict);
  if (which == "marking")
    return construct_marking_scheme(doc.formula, ab.alpha, ab.beta, o.fail_prob, rng);
  if (which == "general")
    return construct_general_scheme(doc.formula, ab.alpha, ab.beta, o.fail_prob, rng, strict);
  throw Error("unknown constructor '" + which + "'");
}

SamplerSchedule schedule_of(const InstanceDocument& doc, const FormulaStats& stats,
                            const Options& o) {
  ScheduleOverrides ov;
  ov.T = o.T;
  ov.R = o.R;
  ov.L = o.L;
  ov.eta = o.eta;
  return derive_schedule(stats, profile_of(doc, o), o.eps,
                         o.mode == "strict" ? SamplerMode::strict : SamplerMode::forced, o.seed,
                         ov);
}

nlohmann::ordered_json constructor_json(const ConstructorPrecondition& p) {
  nlohmann::ordered_json j;
  j["applicable"] = p.applicable;
  j["pass"] = p.pass;
  j["margin_bits"] = p.margin_bits;
  j["detail"] = p.detail;
  return j;
}

int run_check(const Options& o) {
  const InstanceDocument doc = parse_document(o);
  const FormulaStats stats = compute_stats(doc.formula);
  const ClassProfile profile = profile_of(doc, o);
  const RegimeReport regime = regime_of(doc, stats, profile);
  const AlphaBeta ab = alpha_beta_of(doc, o);
  const PreconditionReport pre =
      check_projection_precondition(doc.cls, stats, ab.alpha, ab.beta);

  if (o.output == "json") {
    nlohmann::ordered_json j;
    j["class"] = class_name(doc.cls);
    nlohmann::ordered_json st;
    st["vars"] = stats.num_vars;
    st["constraints"] = stats.num_constraints;
    st["max_width"] = stats.max_width;
    st["min_width"] = stats.min_width;
    st["max_domain"] = stats.max_domain;
    st["max_degree"] = stats.max_degree;
    st["max_var_degree"] = stats.max_var_degree;
    st["homogeneous_domains"] = stats.homogeneous_domains;
    st["uniform_width"] = stats.uniform_width;
    st["log2_inv_p"] = stats.log2_inv_p;
    j["stats"] = st;
    nlohmann::ordered_json rg;
    rg["pass"] = regime.pass;
    rg["inequality"] = regime.inequality;
    rg["lhs_bits"] = regime.lhs_bits;
    rg["rhs_bits"] = regime.rhs_bits;
    rg["margin_bits"] = regime.margin_bits;
    if (regime.simplified_applicable) {
      rg["simplified_pass"] = regime.simplified_pass;
      rg["simplified_threshold"] = regime.simplified_threshold;
    }
    j["regime"] = rg;
    nlohmann::ordered_json cons;
    cons["interval"] = constructor_json(pre.interval);
    cons["marking"] = constructor_json(pre.marking);
    cons["general"] = constructor_json(pre.general);
    j["constructors"] = cons;
    j["recommended"] = pre.recommended;
    for (const std::string& w : doc.warnings) j["warnings"].push_back(w);
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "class: " << class_name(doc.cls) << '\n';
    std::cout << "vars: " << stats.num_vars << "  constraints: " << stats.num_constraints
              << "  width: " << stats.min_width << ".." << stats.max_width
              << "  max domain: " << stats.max_domain << '\n';
    std::cout << "dependency degree D: " << stats.max_degree
              << "  variable degree d: " << stats.max_var_degree
              << "  log2(1/p): " << stats.log2_inv_p << '\n';
    std::cout << "regime: " << (regime.pass ? "pass" : "fail") << "  [" << regime.inequality
              << "]  margin " << regime.margin_bits << " bits\n";
    const auto line = [](const char* name, const ConstructorPrecondition& p) {
      std::cout << "constructor " << name << ": "
                << (!p.applicable ? "not applicable" : p.pass ? "pass" : "fail") << "  ("
                << p.detail << ")\n";
    };
    line("interval", pre.interval);
    line("marking", pre.marking);
    line("general", pre.general);
    std::cout << "recommended: " << pre.recommended << '\n';
    for (const std::string& w : doc.warnings) std::cout << "warning: " << w << '\n';
  }

  if (o.mode == "strict" && !regime.pass) return 2;
  return 0;
}

int run_project(const Options& o) {
  const InstanceDocument doc = parse_document(o);
  const FormulaStats stats = compute_stats(doc.formula);
  Rng rng(o.seed);
  const ProjectionScheme scheme = build_scheme(doc, stats, o, rng);
  const AlphaBeta ab = alpha_beta_of(doc, o);
  const EntropyReport entropy =
      verify_entropy_criterion(doc.formula, scheme, ab.alpha, ab.beta);

  std::cout << serialize_scheme(scheme.alphabet_sizes());

  double worst_upper = std::numeric_limits<double>::infinity();
  double worst_lower = std::numeric_limits<double>::infinity();
  for (const auto& pc : entropy.constraints) {
    worst_upper = std::min(worst_upper, ab.alpha * pc.domain_bits - pc.ceil_bits);
    worst_lower = std::min(worst_lower, pc.floor_bits - ab.beta * pc.domain_bits);
  }
  std::cerr << "entropy criterion: " << (entropy.pass ? "pass" : "FAIL") << " at alpha="
            << ab.alpha << " beta=" << ab.beta;
  if (!entropy.constraints.empty())
    std::cerr << "  (worst upper slack " << worst_upper << " bits, lower " << worst_lower
              << " bits)";
  std::cerr << '\n';
  return entropy.pass ? 0 : 1;
}

int run_sample(const Options& o) {
  const InstanceDocument doc = parse_document(o);
  const FormulaStats stats = compute_stats(doc.formula);
  const SamplerSchedule schedule = schedule_of(doc, stats, o);
  Rng rng(o.seed);
  const ProjectionScheme scheme = build_scheme(doc, stats, o, rng);
  const Sampler sampler(doc.formula, scheme, schedule);

  const std::vector<RunReport> reports = sampler.run_many(o.samples, o.workers);
  std::vector<Assignment> samples;
  samples.reserve(reports.size());
  int64_t giant = 0, overflow = 0;
  for (const RunReport& rep : reports) {
    samples.push_back(rep.assignment);
    giant += rep.giant_exceptions;
    overflow += rep.overflow_exceptions;
  }

  if (o.output == "json") {
    std::cout << emit_samples_json(samples, schedule, giant, overflow);
  } else {
    std::cout << emit_samples_lines(samples);
    if (giant + overflow > 0)
      std::cerr << "exceptions: giant_component=" << giant << " rejection_overflow=" << overflow
                << '\n';
  }
  return 0;
}

int run_verify(const Options& o) {
  const InstanceDocument doc = parse_document(o);
  const FormulaStats stats = compute_stats(doc.formula);

  ExactDistributions oracle;
  try {
    oracle = enumerate_solutions(doc.formula, o.budget);
  } catch (const BudgetExceeded&) {
    std::cout << "state space exceeds the enumeration budget; use a smaller instance\n";
    return 1;
  }
  std::cout << "solutions: " << oracle.count() << '\n';
  if (oracle.count() == 0) {
    std::cout << "no solutions; nothing to verify\n";
    return 0;
  }

  Rng rng(o.seed);
  const ProjectionScheme scheme = build_scheme(doc, stats, o, rng);
  const AlphaBeta ab = alpha_beta_of(doc, o);
  bool all_ok = true;
  const auto report = [&all_ok](bool ok, const std::string& line) {
    std::cout << (ok ? "ok: " : "FAIL: ") << line << '\n';
    all_ok = all_ok && ok;
  };

  const EntropyReport entropy =
      verify_entropy_criterion(doc.formula, scheme, ab.alpha, ab.beta);
  report(entropy.pass, "entropy criterion");

  try {
    const GlauberMatrix gm = exact_glauber_matrix(oracle, scheme, 2000);
    std::ostringstream line;
    line << "chain row sums (err " << gm.max_row_sum_error() << ")";
    report(gm.max_row_sum_error() <= 1e-12, line.str());
    std::ostringstream line2;
    line2 << "detailed balance (err " << gm.max_detailed_balance_error() << ")";
    report(gm.max_detailed_balance_error() <= 1e-12, line2.str());
    std::ostringstream line3;
    line3 << "stationarity (residual " << gm.stationary_residual() << ")";
    report(gm.stationary_residual() <= 1e-10, line3.str());
  } catch (const TooLargeToEnumerate&) {
    std::cout << "skip: projected support too large for the exact chain\n";
  }

  // fibre inversion uniformity, chi-square with one rerun on failure
  {
    int64_t pairs = 0;
    for (int v = 0; v < scheme.num_vars(); ++v) pairs += scheme.alphabet_size(v);
    const bool subsample = pairs > 64;
    bool ok = true;
    const int draws = 20000;
    for (int v = 0; v < scheme.num_vars(); ++v) {
      for (Value y = 0; y < scheme.alphabet_size(v); ++y) {
        if (subsample && (v * 31 + y) % (pairs / 64 + 1) != 0) continue;
        const int32_t size = scheme.preimage_size(v, y);
        if (size < 2) continue;
        bool pair_ok = false;
        for (int attempt = 0; attempt < 2 && !pair_ok; ++attempt) {
          Rng r(Rng::stream_seed(o.seed + attempt, static_cast<uint64_t>(v) * 1000 + y));
          std::vector<int64_t> tally(size, 0);
          for (int i = 0; i < draws; ++i)
            ++tally[scheme.invert(v, y, r) - scheme.preimage_begin(v, y)];
          const double expected = static_cast<double>(draws) / size;
          double chi2 = 0;
          for (const int64_t t : tally) chi2 += (t - expected) * (t - expected) / expected;
          pair_ok = chi_square_pvalue(chi2, size - 1) > 1e-4;
        }
        ok = ok && pair_ok;
      }
    }
    report(ok, "fibre inversion uniformity");
  }

  // conditional updates against the exact conditional law
  {
    ScheduleOverrides ov;
    ov.R = 10000;
    ov.L = 1 << 20;
    ClassProfile profile = profile_of(doc, o);
    const SamplerSchedule sch =
        derive_schedule(stats, profile, o.eps, SamplerMode::forced, o.seed, ov);
    const Sampler sampler(doc.formula, scheme, sch);
    Rng pick(Rng::stream_seed(o.seed, 0xabcd));
    bool ok = true;
    const int draws = 20000;
    for (int probe = 0; probe < 5 && doc.formula.num_vars() > 0; ++probe) {
      const Assignment& x = sample_exact(oracle, pick);
      const int v = static_cast<int>(pick.below(static_cast<uint64_t>(doc.formula.num_vars())));
      const PartialProjectedConfig y = PartialProjectedConfig::all_but(scheme.project(x), v);
      const int32_t S[] = {v};
      const CountTable exact = exact_conditional(oracle, scheme, y, S);
      bool probe_ok = false;
      for (int attempt = 0; attempt < 2 && !probe_ok; ++attempt) {
        Rng r(Rng::stream_seed(o.seed + 7 * attempt + 1, probe));
        SamplerWorkspace ws;
        std::vector<int64_t> tally(doc.formula.domain_size(v), 0);
        bool clean = true;
        for (int i = 0; i < draws; ++i) {
          const SampleOutcome out = sampler.inverse_sample(y, S, r, ws);
          clean = clean && out.exception == SampleException::none;
          ++tally[out.values[0]];
        }
        std::vector<std::pair<int64_t, int64_t>> counts;
        for (int64_t code = 0; code < static_cast<int64_t>(tally.size()); ++code)
          if (tally[code] > 0) counts.push_back({code, tally[code]});
        const DistanceReport dist = tv_distance(counts, exact);
        probe_ok = clean && dist.p_value > 1e-6;
      }
      ok = ok && probe_ok;
    }
    report(ok, "conditional updates match the exact law");
  }

  return all_ok ? 0 : 1;
}

int run_bench(const Options& o) {
  std::cout << "instance,n,D,k,step_us,scanned,giant,overflow\n";

  const auto bench_one = [&](const std::string& name, const CspFormula& formula,
                             const ProjectionScheme& scheme, InstanceClass cls) {
    const FormulaStats stats = compute_stats(formula);
    ClassProfile profile;
    profile.cls = cls;
    profile.zeta = default_zeta(cls);
    ScheduleOverrides ov;
    ov.T = std::max<int64_t>(2000, 10 * stats.num_vars);
    const SamplerSchedule sch =
        derive_schedule(stats, profile, 0.1, SamplerMode::forced, o.seed, ov);
    const Sampler sampler(formula, scheme, sch);
    const std::vector<RunReport> reports = sampler.run_many(1, 1);
    const RunReport& rep = reports[0];
    const double step_us = rep.wall_seconds / static_cast<double>(rep.steps + 1) * 1e6;
    std::cout << name << ',' << stats.num_vars << ',' << stats.max_degree << ','
              << stats.max_width << ',' << step_us << ',' << rep.constraints_scanned << ','
              << rep.giant_exceptions << ',' << rep.overflow_exceptions << '\n';
  };

  if (!o.bench_input.empty()) {
    Options in = o;
    in.input = o.bench_input;
    const InstanceDocument doc = parse_document(in);
    const FormulaStats stats = compute_stats(doc.formula);
    Rng rng(o.seed);
    const ProjectionScheme scheme = build_scheme(doc, stats, in, rng);
    bench_one(o.bench_input, doc.formula, scheme, doc.cls);
    return 0;
  }

  // built-in sweep: unconstrained product spaces and random 3-cnf
  for (const int n : {64, 256}) {
    const CspFormula f = build_formula(n, std::vector<int32_t>(n, 5), {});
    bench_one("free-q5-n" + std::to_string(n), f,
              ProjectionScheme(f.domain_sizes(), f.domain_sizes()), InstanceClass::general);
  }
  for (const int n : {32, 128}) {
    Rng rng(42 + static_cast<uint64_t>(n));
    const int m = n;
    std::vector<AtomicConstraint> cons;
    for (int c = 0; c < m; ++c) {
      AtomicConstraint con;
      std::vector<int32_t> pool(n);
      std::iota(pool.begin(), pool.end(), 0);
      for (int i = 0; i < 3; ++i) {
        const int j = i + static_cast<int>(rng.below(static_cast<uint64_t>(n - i)));
        std::swap(pool[i], pool[j]);
        con.scope.push_back(pool[i]);
        con.forbidden.push_back(static_cast<Value>(rng.below(2)));
      }
      cons.push_back(con);
    }
    const CspFormula f = build_formula(n, std::vector<int32_t>(n, 2), cons);
    bench_one("cnf3-n" + std::to_string(n), f,
              ProjectionScheme(f.domain_sizes(), f.domain_sizes()), InstanceClass::cnf);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"near-uniform sampling for atomic constraint satisfaction problems"};
  app.require_subcommand(1);

  Options o;
  const auto add_common = [&o](CLI::App* cmd, bool with_input = true) {
    if (with_input) cmd->add_option("input", o.input, "instance file, or '-' for stdin");
    cmd->add_option("--format", o.format, "input format")
        ->check(CLI::IsMember({"auto", "cnf", "hyp", "acsp"}));
    cmd->add_option("--mode", o.mode, "enforce or skip the tractability gates")
        ->check(CLI::IsMember({"strict", "forced"}));
    cmd->add_option("--eps", o.eps, "total variation target");
    cmd->add_option("--zeta", o.zeta, "failure rate for the class regime");
    cmd->add_option("--log2-zeta", o.log2_zeta, "set zeta to 2^-x");
    cmd->add_option("--alpha", o.alpha, "entropy upper fraction");
    cmd->add_option("--beta", o.beta, "entropy lower fraction");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--fail-prob", o.fail_prob, "scheme construction failure budget");
    cmd->add_option("--constructor", o.constructor, "scheme constructor")
        ->check(CLI::IsMember({"auto", "interval", "marking", "general"}));
    cmd->add_option("--scheme", o.scheme_file, "load a scheme file instead of constructing");
  };

  CLI::App* check = app.add_subcommand("check", "report stats, regime and constructor gates");
  add_common(check);
  check->add_option("--output", o.output, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  CLI::App* project = app.add_subcommand("project", "construct and print a projection scheme");
  add_common(project);

  CLI::App* sample = app.add_subcommand("sample", "draw near-uniform satisfying assignments");
  add_common(sample);
  sample->add_option("--samples", o.samples, "number of independent samples");
  sample->add_option("--workers", o.workers, "worker threads (0 = all cores)");
  sample->add_option("--T", o.T, "override the chain length");
  sample->add_option("--R", o.R, "override the rejection budget");
  sample->add_option("--L", o.L, "override the component size cutoff");
  sample->add_option("--eta", o.eta, "override the rejection exponent");
  sample->add_option("--output", o.output, "lines or json")
      ->check(CLI::IsMember({"lines", "json"}));

  CLI::App* verify = app.add_subcommand("verify", "compare against exact enumeration");
  add_common(verify);
  verify->add_option("--budget", o.budget, "enumeration budget in states");

  CLI::App* bench = app.add_subcommand("bench", "time the chain; no input runs a built-in sweep");
  bench->add_option("input", o.bench_input, "instance file, or '-' for stdin");
  bench->add_option("--format", o.format, "input format")
      ->check(CLI::IsMember({"auto", "cnf", "hyp", "acsp"}));
  bench->add_option("--mode", o.mode, "strict or forced")
      ->check(CLI::IsMember({"strict", "forced"}));
  bench->add_option("--seed", o.seed, "random seed");
  bench->add_option("--constructor", o.constructor, "scheme constructor")
      ->check(CLI::IsMember({"auto", "interval", "marking", "general"}));
  bench->add_option("--scheme", o.scheme_file, "load a scheme file instead of constructing");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*check) return run_check(o);
    if (*project) return run_project(o);
    if (*sample) return run_sample(o);
    if (*verify) return run_verify(o);
    if (*bench) return run_bench(o);
  } catch (const RegimeViolated& e) {
    std::cerr << "regime violated: " << e.what() << '\n';
    return 2;
  } catch (const PreconditionViolated& e) {
    std::cerr << "precondition violated: " << e.what() << '\n';
    return 2;
  } catch (const ConstructionFailed& e) {
    std::cerr << "construction failed: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
