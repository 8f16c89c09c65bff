#include "cspsamp/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "cspsamp/regimes.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cspsamp {

namespace {

int64_t ceil_to_int64(double x, int64_t at_least) {
  if (!(x > 0)) return at_least;
  const double c = std::ceil(x);
  if (c >= 9.2e18) return INT64_MAX;
  return std::max(at_least, static_cast<int64_t>(c));
}

}  // namespace

SamplerSchedule derive_schedule(const FormulaStats& stats, const ClassProfile& profile,
                                double eps, SamplerMode mode, uint64_t seed,
                                const ScheduleOverrides& overrides) {
  if (!(eps > 0) || !(eps < 1))
    throw PreconditionViolated("eps must lie in (0,1), got " + std::to_string(eps));

  if (mode == SamplerMode::strict) {
    RegimeReport report;
    switch (profile.cls) {
      case InstanceClass::general:
        report = check_general(stats.log2_inv_p, stats.max_degree, profile.zeta);
        break;
      case InstanceClass::coloring:
        report = check_coloring(profile.k, profile.Delta, profile.q);
        break;
      case InstanceClass::cnf:
        report = check_cnf(profile.k, profile.d, profile.zeta);
        break;
    }
    if (!report.pass)
      throw RegimeViolated(report.inequality + " (margin " + std::to_string(report.margin_bits) +
                           " bits)");
  }

  SamplerSchedule sch;
  sch.eps = eps;
  sch.seed = seed;
  sch.mode = mode;

  const double n = static_cast<double>(stats.num_vars);
  if (overrides.T) {
    sch.T = *overrides.T;
    sch.T_overridden = true;
  } else {
    sch.T = stats.num_vars > 0 ? ceil_to_int64(2.0 * n * std::log2(n / eps), 0) : 0;
  }

  if (overrides.delta) {
    sch.delta = *overrides.delta;
    sch.delta_overridden = true;
  } else {
    sch.delta = eps / (4.0 * (static_cast<double>(sch.T) + 1.0));
  }

  if (overrides.eta) {
    sch.eta = *overrides.eta;
    sch.eta_overridden = true;
  } else {
    sch.eta = class_eta(profile);
  }

  if (overrides.R) {
    sch.R = *overrides.R;
    sch.R_overridden = true;
  } else {
    const double base = n / sch.delta;
    sch.R = ceil_to_int64(10.0 * std::pow(base, sch.eta) * std::log2(base), 1);
  }

  if (overrides.L) {
    sch.L = *overrides.L;
    sch.L_overridden = true;
  } else {
    const double D = static_cast<double>(stats.max_degree);
    sch.L = stats.max_degree > 0
                ? ceil_to_int64(2.0 * D * std::log2(n * D / sch.delta), 1)
                : 1;
  }
  return sch;
}

PartialProjectedConfig PartialProjectedConfig::full(std::vector<Value> y) {
  PartialProjectedConfig p;
  p.known.assign(y.size(), 1);
  p.values = std::move(y);
  return p;
}

PartialProjectedConfig PartialProjectedConfig::all_but(std::vector<Value> y, int v) {
  PartialProjectedConfig p = full(std::move(y));
  p.known[v] = 0;
  return p;
}

PartialProjectedConfig PartialProjectedConfig::none(int n) {
  PartialProjectedConfig p;
  p.values.assign(n, 0);
  p.known.assign(n, 0);
  return p;
}

bool is_satisfied_by_projection(const AtomicConstraint& constraint,
                                const std::vector<Value>& projected_forbidden,
                                const PartialProjectedConfig& y) {
  for (size_t i = 0; i < constraint.scope.size(); ++i) {
    const int32_t v = constraint.scope[i];
    if (y.known[v] && y.values[v] != projected_forbidden[i]) return true;
  }
  return false;
}

const char* to_string(SampleException e) {
  switch (e) {
    case SampleException::none: return "none";
    case SampleException::giant_component: return "giant_component";
    case SampleException::rejection_overflow: return "rejection_overflow";
  }
  return "?";
}

void SamplerWorkspace::resize(int num_vars, int num_constraints) {
  if (static_cast<int>(var_epoch_.size()) != num_vars ||
      static_cast<int>(con_epoch_.size()) != num_constraints) {
    var_epoch_.assign(num_vars, -1);
    con_epoch_.assign(num_constraints, -1);
    epoch_ = 0;
    draw_.assign(num_vars, 0);
  }
}

Sampler::Sampler(const CspFormula& formula, const ProjectionScheme& scheme,
                 SamplerSchedule schedule)
    : formula_(formula), scheme_(scheme), schedule_(schedule) {
  if (scheme_.domain_sizes() != formula_.domain_sizes())
    throw PreconditionViolated("scheme domains do not match the formula");
  graph_ = build_dependency_graph(formula_);
  projected_forbidden_.reserve(formula_.num_constraints());
  for (const AtomicConstraint& c : formula_.constraints())
    projected_forbidden_.push_back(project_forbidden(c, scheme_));
}

const FactorizeResult& Sampler::factorize(const PartialProjectedConfig& y,
                                          std::span<const int32_t> S, SamplerWorkspace& ws) const {
  ws.resize(formula_.num_vars(), formula_.num_constraints());
  if (ws.epoch_ == INT32_MAX) {
    std::fill(ws.var_epoch_.begin(), ws.var_epoch_.end(), -1);
    std::fill(ws.con_epoch_.begin(), ws.con_epoch_.end(), -1);
    ws.epoch_ = 0;
  }
  const int32_t epoch = ++ws.epoch_;

  FactorizeResult& fr = ws.factor_;
  fr.giant = false;
  fr.constraints_scanned = 0;
  size_t used = 0;
  auto acquire = [&]() -> Component& {
    if (used < fr.components.size()) {
      fr.components[used].vars.clear();
      fr.components[used].constraints.clear();
    } else {
      fr.components.emplace_back();
    }
    return fr.components[used++];
  };

  for (const int32_t seed : S) {
    if (ws.var_epoch_[seed] == epoch) continue;
    ws.var_epoch_[seed] = epoch;
    Component& comp = acquire();
    comp.vars.push_back(seed);
    ws.var_stack_.clear();
    ws.var_stack_.push_back(seed);
    while (!ws.var_stack_.empty()) {
      const int32_t u = ws.var_stack_.back();
      ws.var_stack_.pop_back();
      for (const int32_t c : graph_.var_incidence[u]) {
        if (ws.con_epoch_[c] == epoch) continue;
        ws.con_epoch_[c] = epoch;
        ++fr.constraints_scanned;
        if (is_satisfied_by_projection(formula_.constraint(c), projected_forbidden_[c], y))
          continue;
        comp.constraints.push_back(c);
        if (static_cast<int64_t>(comp.constraints.size()) > schedule_.L) {
          fr.giant = true;
          fr.components.resize(used);
          return fr;
        }
        for (const int32_t w : formula_.constraint(c).scope) {
          if (ws.var_epoch_[w] == epoch) continue;
          ws.var_epoch_[w] = epoch;
          comp.vars.push_back(w);
          ws.var_stack_.push_back(w);
        }
      }
    }
    std::sort(comp.vars.begin(), comp.vars.end());
  }
  fr.components.resize(used);
  return fr;
}

std::optional<int64_t> Sampler::rejection_sample_component(const Component& comp,
                                                           const PartialProjectedConfig& y,
                                                           int64_t R, Rng& rng,
                                                           SamplerWorkspace& ws) const {
  ws.resize(formula_.num_vars(), formula_.num_constraints());
  for (int64_t trial = 1; trial <= R; ++trial) {
    for (const int32_t v : comp.vars) {
      ws.draw_[v] = y.known[v]
                        ? scheme_.invert(v, y.values[v], rng)
                        : static_cast<Value>(rng.below(static_cast<uint64_t>(formula_.domain_size(v))));
    }
    bool accept = true;
    for (const int32_t c : comp.constraints) {
      const AtomicConstraint& con = formula_.constraint(c);
      bool hit = true;
      for (size_t i = 0; i < con.scope.size(); ++i) {
        if (ws.draw_[con.scope[i]] != con.forbidden[i]) {
          hit = false;
          break;
        }
      }
      if (hit) {
        accept = false;
        break;
      }
    }
    if (accept) return trial;
  }
  return std::nullopt;
}

SampleOutcome Sampler::inverse_sample(const PartialProjectedConfig& y, std::span<const int32_t> S,
                                      Rng& rng, SamplerWorkspace& ws) const {
  SampleOutcome out;
  out.values.resize(S.size());

  auto redraw_uniform = [&] {
    for (size_t i = 0; i < S.size(); ++i)
      out.values[i] =
          static_cast<Value>(rng.below(static_cast<uint64_t>(formula_.domain_size(S[i]))));
  };

  const FactorizeResult& fr = factorize(y, S, ws);
  out.constraints_scanned = fr.constraints_scanned;
  out.components = static_cast<int32_t>(fr.components.size());
  if (fr.giant) {
    out.exception = SampleException::giant_component;
    redraw_uniform();
    return out;
  }
  for (const Component& comp : fr.components) {
    const std::optional<int64_t> trials =
        rejection_sample_component(comp, y, schedule_.R, rng, ws);
    out.trials += trials.value_or(schedule_.R);
    if (!trials) {
      out.exception = SampleException::rejection_overflow;
      redraw_uniform();
      return out;
    }
  }
  for (size_t i = 0; i < S.size(); ++i) out.values[i] = ws.draw_[S[i]];
  return out;
}

SampleOutcome Sampler::inverse_sample(const PartialProjectedConfig& y, std::span<const int32_t> S,
                                      Rng& rng) const {
  SamplerWorkspace ws;
  return inverse_sample(y, S, rng, ws);
}

RunReport Sampler::run_glauber(Rng& rng) const {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = formula_.num_vars();
  RunReport rep;
  rep.schedule = schedule_;
  SamplerWorkspace ws;
  ws.resize(n, formula_.num_constraints());

  auto tally = [&rep](const SampleOutcome& out) {
    if (out.exception == SampleException::giant_component) ++rep.giant_exceptions;
    if (out.exception == SampleException::rejection_overflow) ++rep.overflow_exceptions;
    rep.trials_total += out.trials;
    rep.constraints_scanned += out.constraints_scanned;
  };

  Assignment x(n);
  for (int v = 0; v < n; ++v)
    x[v] = static_cast<Value>(rng.below(static_cast<uint64_t>(formula_.domain_size(v))));
  PartialProjectedConfig y = PartialProjectedConfig::full(scheme_.project(x));

  int32_t pick[1];
  for (int64_t t = 0; t < schedule_.T; ++t) {
    const int v = n > 0 ? static_cast<int>(rng.below(static_cast<uint64_t>(n))) : 0;
    if (n == 0) break;
    y.known[v] = 0;
    pick[0] = v;
    const SampleOutcome out = inverse_sample(y, std::span<const int32_t>(pick, 1), rng, ws);
    tally(out);
    y.values[v] = scheme_.evaluate(v, out.values[0]);
    y.known[v] = 1;
  }
  rep.steps = schedule_.T;

  std::vector<int32_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const SampleOutcome out = inverse_sample(y, all, rng, ws);
  tally(out);
  rep.assignment = out.values;

  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::vector<RunReport> Sampler::run_many(int64_t num_chains, int workers) const {
  std::vector<RunReport> reports(num_chains);
#ifdef _OPENMP
  if (workers <= 0) workers = omp_get_max_threads();
  if (workers > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (int64_t i = 0; i < num_chains; ++i) {
      Rng rng(Rng::stream_seed(schedule_.seed, static_cast<uint64_t>(i)));
      reports[i] = run_glauber(rng);
    }
    return reports;
  }
#else
  (void)workers;
#endif
  for (int64_t i = 0; i < num_chains; ++i) {
    Rng rng(Rng::stream_seed(schedule_.seed, static_cast<uint64_t>(i)));
    reports[i] = run_glauber(rng);
  }
  return reports;
}

}  // namespace cspsamp
