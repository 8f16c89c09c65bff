#include "cspsamp/projection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cspsamp {

namespace {

constexpr double kTol = 1e-9;  // additive slack on all log2 comparisons

void require_alpha_beta(double alpha, double beta) {
  if (!(beta > 0) || !(alpha > beta) || !(alpha < 1))
    throw InvalidAlphaBeta("need 0 < beta < alpha < 1, got alpha=" + std::to_string(alpha) +
                           " beta=" + std::to_string(beta));
}

int32_t interval_alphabet_size(int32_t q, double alpha, double beta) {
  const double e = (2.0 - alpha - beta) / 2.0;
  const double s = std::ceil(std::pow(static_cast<double>(q), e));
  return static_cast<int32_t>(std::clamp(s, 1.0, static_cast<double>(q)));
}

int64_t attempt_count(double fail_probability) {
  if (!(fail_probability > 0) || !(fail_probability < 1))
    throw PreconditionViolated("fail probability must lie in (0,1)");
  return std::max<int64_t>(1, static_cast<int64_t>(std::ceil(std::log2(1.0 / fail_probability))));
}

}  // namespace

ProjectionScheme::ProjectionScheme(std::vector<int32_t> domain_sizes,
                                   std::vector<int32_t> alphabet_sizes)
    : domain_sizes_(std::move(domain_sizes)), alphabet_sizes_(std::move(alphabet_sizes)) {
  if (domain_sizes_.size() != alphabet_sizes_.size())
    throw PreconditionViolated("alphabet list does not match the variable count");
  for (size_t v = 0; v < domain_sizes_.size(); ++v)
    if (alphabet_sizes_[v] < 1 || alphabet_sizes_[v] > domain_sizes_[v])
      throw PreconditionViolated("alphabet size of variable " + std::to_string(v) +
                                 " outside [1, domain size]");
}

Value ProjectionScheme::evaluate(int v, Value x) const {
  const int32_t q = domain_sizes_[v], s = alphabet_sizes_[v];
  if (x < 0 || x >= q) throw ValueOutOfDomain("value " + std::to_string(x));
  const int32_t a = (q + s - 1) / s;  // big interval size
  const int32_t b = q / s;
  const int32_t r = q % s;  // number of big intervals
  const int32_t boundary = r * a;
  return x < boundary ? x / a : r + (x - boundary) / b;
}

Value ProjectionScheme::preimage_begin(int v, Value y) const {
  const int32_t q = domain_sizes_[v], s = alphabet_sizes_[v];
  if (y < 0 || y >= s) throw SymbolOutOfAlphabet("symbol " + std::to_string(y));
  const int32_t a = (q + s - 1) / s;
  const int32_t b = q / s;
  const int32_t r = q % s;
  return y < r ? y * a : r * a + (y - r) * b;
}

int32_t ProjectionScheme::preimage_size(int v, Value y) const {
  const int32_t q = domain_sizes_[v], s = alphabet_sizes_[v];
  if (y < 0 || y >= s) throw SymbolOutOfAlphabet("symbol " + std::to_string(y));
  const int32_t r = q % s;
  return y < r ? (q + s - 1) / s : q / s;
}

Value ProjectionScheme::invert(int v, Value y, Rng& rng) const {
  const int32_t size = preimage_size(v, y);
  return preimage_begin(v, y) + static_cast<Value>(rng.below(static_cast<uint64_t>(size)));
}

std::vector<Value> ProjectionScheme::project(const Assignment& x) const {
  if (x.size() != domain_sizes_.size())
    throw IncompleteAssignment("assignment length " + std::to_string(x.size()));
  std::vector<Value> y(x.size());
  for (size_t v = 0; v < x.size(); ++v) y[v] = evaluate(static_cast<int>(v), x[v]);
  return y;
}

EntropyReport verify_entropy_criterion(const CspFormula& formula, const ProjectionScheme& scheme,
                                       double alpha, double beta) {
  require_alpha_beta(alpha, beta);
  EntropyReport report;
  report.alpha = alpha;
  report.beta = beta;
  report.constraints.reserve(formula.num_constraints());
  for (const AtomicConstraint& c : formula.constraints()) {
    EntropyReport::PerConstraint pc;
    for (int32_t v : c.scope) {
      const double q = formula.domain_size(v);
      const double s = scheme.alphabet_size(v);
      pc.ceil_bits += std::log2(std::ceil(q / s));
      pc.floor_bits += std::log2(std::floor(q / s));
      pc.domain_bits += std::log2(q);
    }
    pc.upper_ok = pc.ceil_bits <= alpha * pc.domain_bits + kTol;
    pc.lower_ok = pc.floor_bits >= beta * pc.domain_bits - kTol;
    report.pass = report.pass && pc.upper_ok && pc.lower_ok;
    report.constraints.push_back(pc);
  }
  return report;
}

ProjectionScheme construct_interval_scheme(const CspFormula& formula, double alpha, double beta,
                                           bool check_preconditions) {
  require_alpha_beta(alpha, beta);
  const int n = formula.num_vars();
  if (n == 0) return ProjectionScheme({}, {});
  const int32_t q = formula.domain_size(0);
  for (int v = 1; v < n; ++v)
    if (formula.domain_size(v) != q)
      throw PreconditionViolated("interval scheme needs a homogeneous domain");
  if (check_preconditions) {
    const double mid = std::pow(static_cast<double>(q), (alpha + beta) / 2.0);
    if (mid < 7.0 - kTol)
      throw PreconditionViolated("q^((alpha+beta)/2) = " + std::to_string(mid) + " < 7");
    if (mid > q / 6.0 + kTol)
      throw PreconditionViolated("q^((alpha+beta)/2) = " + std::to_string(mid) + " > q/6");
    if (std::log2(static_cast<double>(q)) < 1.0 / (alpha - beta) - kTol)
      throw PreconditionViolated("log2 q < 1/(alpha-beta)");
  }
  std::vector<int32_t> s(n, interval_alphabet_size(q, alpha, beta));
  return ProjectionScheme(formula.domain_sizes(), std::move(s));
}

namespace {

// Shared Moser-Tardos loop over mark vectors. `violated` returns the lowest
// index of a constraint whose bad event currently holds (or -1), `resample`
// redraws the marks the caller owns inside that constraint and returns false
// when it owns none there (the attempt cannot make progress).
template <typename ViolatedFn, typename ResampleFn, typename DrawAllFn>
bool moser_tardos(int64_t attempts, int64_t cap, DrawAllFn draw_all, ViolatedFn violated,
                  ResampleFn resample) {
  for (int64_t attempt = 0; attempt < attempts; ++attempt) {
    draw_all();
    bool stuck = false;
    for (int64_t step = 0;; ++step) {
      const int bad = violated();
      if (bad < 0) return true;
      if (step >= cap || !resample(bad)) {
        stuck = true;
        break;
      }
    }
    (void)stuck;
  }
  return false;
}

}  // namespace

ProjectionScheme construct_marking_scheme(const CspFormula& formula, double alpha, double beta,
                                          double fail_probability, Rng& rng) {
  require_alpha_beta(alpha, beta);
  const int n = formula.num_vars();
  const int m = formula.num_constraints();
  if (m == 0) {
    // no bad events; a single independent draw is already valid
    std::vector<int32_t> s(n);
    const double mark_prob = (2.0 - alpha - beta) / 2.0;
    for (int v = 0; v < n; ++v)
      s[v] = rng.unit() < mark_prob ? formula.domain_size(v) : 1;
    return ProjectionScheme(formula.domain_sizes(), std::move(s));
  }

  const int k = formula.constraint(0).width();
  for (int c = 1; c < m; ++c)
    if (formula.constraint(c).width() != k)
      throw PreconditionViolated("marking scheme needs uniform constraint width");
  for (int v = 1; v < n; ++v)
    if (formula.domain_size(v) != formula.domain_size(0))
      throw PreconditionViolated("marking scheme needs a homogeneous domain");
  if (k == 0) throw PreconditionViolated("marking scheme needs positive constraint width");

  // marked count per constraint must land in this window
  const int64_t lo = static_cast<int64_t>(std::ceil((1.0 - alpha) * k - kTol));
  const int64_t hi = static_cast<int64_t>(std::floor((1.0 - beta) * k + kTol));

  const double mark_prob = (2.0 - alpha - beta) / 2.0;
  std::vector<uint8_t> marked(n, 0);

  auto draw_all = [&] {
    for (int v = 0; v < n; ++v) marked[v] = rng.unit() < mark_prob ? 1 : 0;
  };
  auto violated = [&]() -> int {
    for (int c = 0; c < m; ++c) {
      int64_t t = 0;
      for (int32_t v : formula.constraint(c).scope) t += marked[v] ? 1 : 0;
      if (t < lo || t > hi) return c;
    }
    return -1;
  };
  auto resample = [&](int c) {
    for (int32_t v : formula.constraint(c).scope) marked[v] = rng.unit() < mark_prob ? 1 : 0;
    return true;
  };

  const int64_t cap = static_cast<int64_t>(std::ceil(4.0 * n / k));
  if (!moser_tardos(attempt_count(fail_probability), cap, draw_all, violated, resample))
    throw ConstructionFailed("marking attempts exhausted; the width/degree regime is too tight");

  std::vector<int32_t> s(n);
  for (int v = 0; v < n; ++v) s[v] = marked[v] ? formula.domain_size(v) : 1;
  return ProjectionScheme(formula.domain_sizes(), std::move(s));
}

ProjectionScheme construct_general_scheme(const CspFormula& formula, double alpha, double beta,
                                          double fail_probability, Rng& rng,
                                          bool check_preconditions) {
  require_alpha_beta(alpha, beta);
  const int n = formula.num_vars();
  const int m = formula.num_constraints();
  const FormulaStats stats = compute_stats(formula);

  if (check_preconditions) {
    const double logD = stats.max_degree > 0 ? std::log2(static_cast<double>(stats.max_degree)) : 0.0;
    const double need = 25.0 / std::pow(alpha - beta, 3.0) * (logD + 3.0);
    if (stats.log2_inv_p < need - kTol)
      throw PreconditionViolated("log2(1/p) = " + std::to_string(stats.log2_inv_p) + " < " +
                                 std::to_string(need));
  }

  const double large_bits = 5.0 / (alpha - beta);
  std::vector<int32_t> s(n);
  std::vector<int32_t> small_vars;
  for (int v = 0; v < n; ++v) {
    const int32_t q = formula.domain_size(v);
    if (std::log2(static_cast<double>(q)) >= large_bits) {
      s[v] = interval_alphabet_size(q, alpha, beta);
    } else {
      s[v] = 1;  // provisional; marking decides
      small_vars.push_back(v);
    }
  }

  if (small_vars.empty() || m == 0) {
    if (!small_vars.empty()) {
      const double mark_prob = (2.0 - alpha - beta) / 2.0;
      for (int32_t v : small_vars)
        s[v] = rng.unit() < mark_prob ? formula.domain_size(v) : 1;
    }
    return ProjectionScheme(formula.domain_sizes(), std::move(s));
  }

  std::vector<uint8_t> is_small(n, 0);
  for (int32_t v : small_vars) is_small[v] = 1;

  const double mark_prob = (2.0 - alpha - beta) / 2.0;
  auto draw_all = [&] {
    for (int32_t v : small_vars)
      s[v] = rng.unit() < mark_prob ? formula.domain_size(v) : 1;
  };
  auto entropy_bad = [&](int c) {
    double ceil_bits = 0, floor_bits = 0, domain_bits = 0;
    for (int32_t v : formula.constraint(c).scope) {
      const double q = formula.domain_size(v);
      const double sv = s[v];
      ceil_bits += std::log2(std::ceil(q / sv));
      floor_bits += std::log2(std::floor(q / sv));
      domain_bits += std::log2(q);
    }
    return ceil_bits > alpha * domain_bits + kTol || floor_bits < beta * domain_bits - kTol;
  };
  auto violated = [&]() -> int {
    for (int c = 0; c < m; ++c)
      if (entropy_bad(c)) return c;
    return -1;
  };
  auto resample = [&](int c) {
    bool any = false;
    for (int32_t v : formula.constraint(c).scope) {
      if (!is_small[v]) continue;
      s[v] = rng.unit() < mark_prob ? formula.domain_size(v) : 1;
      any = true;
    }
    return any;
  };

  const int64_t cap =
      static_cast<int64_t>(std::ceil(4.0 * n / std::max(1, stats.max_width)));
  if (!moser_tardos(attempt_count(fail_probability), cap, draw_all, violated, resample))
    throw ConstructionFailed("marking attempts exhausted; the entropy window is too tight");

  return ProjectionScheme(formula.domain_sizes(), std::move(s));
}

std::vector<Value> project_forbidden(const AtomicConstraint& constraint,
                                     const ProjectionScheme& scheme) {
  std::vector<Value> tau(constraint.scope.size());
  for (size_t i = 0; i < constraint.scope.size(); ++i)
    tau[i] = scheme.evaluate(constraint.scope[i], constraint.forbidden[i]);
  return tau;
}

CspFormula build_projected_formula(const CspFormula& formula, const ProjectionScheme& scheme) {
  std::vector<AtomicConstraint> projected;
  projected.reserve(formula.num_constraints());
  for (const AtomicConstraint& c : formula.constraints())
    projected.push_back(AtomicConstraint{c.scope, project_forbidden(c, scheme)});
  return make_formula_unit_domains_ok(scheme.alphabet_sizes(), std::move(projected));
}

ImageLllReport check_image_lll_margins(const CspFormula& formula, const ProjectionScheme& scheme,
                                       double alpha, double beta, double A, double B) {
  require_alpha_beta(alpha, beta);
  ImageLllReport report;
  const FormulaStats stats = compute_stats(formula);
  const double lnD = stats.max_degree > 0 ? std::log(static_cast<double>(stats.max_degree)) : 0.0;
  report.budget_nats = A * lnD + B;

  double image_bits = std::numeric_limits<double>::infinity();
  double cond_bits = std::numeric_limits<double>::infinity();
  for (const AtomicConstraint& c : formula.constraints()) {
    const std::vector<Value> tau = project_forbidden(c, scheme);
    double img = 0, cond = 0;
    for (size_t i = 0; i < c.scope.size(); ++i) {
      const int v = c.scope[i];
      const double q = formula.domain_size(v);
      img += std::log2(q) - std::log2(static_cast<double>(scheme.preimage_size(v, tau[i])));
      cond += std::log2(std::floor(q / scheme.alphabet_size(v)));
    }
    image_bits = std::min(image_bits, img);
    cond_bits = std::min(cond_bits, cond);
  }
  report.image_bits = image_bits;
  report.conditional_bits = cond_bits;
  constexpr double ln2 = 0.6931471805599453;
  report.image_ok = image_bits * ln2 > (1.0 - alpha) * report.budget_nats;
  report.conditional_ok = cond_bits * ln2 > beta * report.budget_nats;
  return report;
}

}  // namespace cspsamp
