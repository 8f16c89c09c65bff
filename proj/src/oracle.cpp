#include "cspsamp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace cspsamp {

ExactDistributions enumerate_solutions(const CspFormula& formula, int64_t budget) {
  const int n = formula.num_vars();
  {
    long double states = 1;
    for (int v = 0; v < n; ++v) {
      states *= formula.domain_size(v);
      if (states > static_cast<long double>(budget))
        throw BudgetExceeded("product state space exceeds the enumeration budget");
    }
  }

  ExactDistributions out;
  out.domain_sizes = formula.domain_sizes();

  for (const AtomicConstraint& c : formula.constraints())
    if (c.width() == 0) return out;  // violated by everything

  // constraints become checkable once their highest-indexed variable is set
  std::vector<std::vector<int32_t>> closing(n);
  for (int c = 0; c < formula.num_constraints(); ++c) {
    const auto& scope = formula.constraint(c).scope;
    const int32_t last = *std::max_element(scope.begin(), scope.end());
    closing[last].push_back(c);
  }

  if (n == 0) {
    out.solutions.push_back({});
    return out;
  }

  Assignment x(n, 0);
  int v = 0;
  while (true) {
    if (v == n) {
      out.solutions.push_back(x);
      --v;
      ++x[v];
      continue;
    }
    if (x[v] >= formula.domain_size(v)) {
      x[v] = 0;
      --v;
      if (v < 0) break;
      ++x[v];
      continue;
    }
    bool ok = true;
    for (const int32_t c : closing[v]) {
      const AtomicConstraint& con = formula.constraint(c);
      bool hit = true;
      for (size_t i = 0; i < con.scope.size(); ++i) {
        if (x[con.scope[i]] != con.forbidden[i]) {
          hit = false;
          break;
        }
      }
      if (hit) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      ++x[v];
      continue;
    }
    ++v;
  }
  return out;
}

int64_t encode_tuple(std::span<const Value> values, std::span<const int32_t> radices) {
  int64_t code = 0, weight = 1;
  for (size_t v = 0; v < values.size(); ++v) {
    code += values[v] * weight;
    weight *= radices[v];
  }
  return code;
}

std::vector<Value> decode_tuple(int64_t code, std::span<const int32_t> radices) {
  std::vector<Value> values(radices.size());
  for (size_t v = 0; v < radices.size(); ++v) {
    values[v] = static_cast<Value>(code % radices[v]);
    code /= radices[v];
  }
  return values;
}

int64_t CountTable::count_of(int64_t code) const {
  const auto it = std::lower_bound(entries.begin(), entries.end(), code,
                                   [](const auto& e, int64_t c) { return e.first < c; });
  return it != entries.end() && it->first == code ? it->second : 0;
}

namespace {

CountTable sorted_table(std::unordered_map<int64_t, int64_t>&& counts, int64_t total,
                        std::vector<int32_t> radices) {
  CountTable t;
  t.entries.assign(counts.begin(), counts.end());
  std::sort(t.entries.begin(), t.entries.end());
  t.total = total;
  t.radices = std::move(radices);
  return t;
}

}  // namespace

CountTable exact_projected(const ExactDistributions& oracle, const ProjectionScheme& scheme) {
  std::unordered_map<int64_t, int64_t> counts;
  std::vector<Value> y(oracle.num_vars());
  for (const Assignment& x : oracle.solutions) {
    for (int v = 0; v < oracle.num_vars(); ++v) y[v] = scheme.evaluate(v, x[v]);
    ++counts[encode_tuple(y, scheme.alphabet_sizes())];
  }
  return sorted_table(std::move(counts), oracle.count(), scheme.alphabet_sizes());
}

CountTable exact_conditional(const ExactDistributions& oracle, const ProjectionScheme& scheme,
                             const PartialProjectedConfig& y, std::span<const int32_t> S) {
  std::vector<int32_t> radices(S.size());
  for (size_t i = 0; i < S.size(); ++i) radices[i] = oracle.domain_sizes[S[i]];

  std::unordered_map<int64_t, int64_t> counts;
  int64_t total = 0;
  std::vector<Value> xs(S.size());
  for (const Assignment& x : oracle.solutions) {
    bool match = true;
    for (int v = 0; v < oracle.num_vars(); ++v) {
      if (y.known[v] && scheme.evaluate(v, x[v]) != y.values[v]) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    ++total;
    for (size_t i = 0; i < S.size(); ++i) xs[i] = x[S[i]];
    ++counts[encode_tuple(xs, radices)];
  }
  if (total == 0) throw EmptySupport("no solution matches the conditioning");
  return sorted_table(std::move(counts), total, std::move(radices));
}

int64_t sample_exact(const CountTable& table, Rng& rng) {
  if (table.total <= 0) throw EmptySupport("empty count table");
  int64_t target = static_cast<int64_t>(rng.below(static_cast<uint64_t>(table.total)));
  for (const auto& [code, count] : table.entries) {
    if (target < count) return code;
    target -= count;
  }
  return table.entries.back().first;
}

const Assignment& sample_exact(const ExactDistributions& oracle, Rng& rng) {
  if (oracle.solutions.empty()) throw NoSolutions("formula has no satisfying assignment");
  return oracle.solutions[rng.below(oracle.solutions.size())];
}

GlauberMatrix exact_glauber_matrix(const ExactDistributions& oracle,
                                   const ProjectionScheme& scheme, int64_t max_states) {
  const CountTable nu = exact_projected(oracle, scheme);
  if (nu.entries.empty()) throw NoSolutions("projected support is empty");
  if (static_cast<int64_t>(nu.entries.size()) > max_states)
    throw TooLargeToEnumerate("projected support has " + std::to_string(nu.entries.size()) +
                              " states");

  const int n = oracle.num_vars();
  const size_t states = nu.entries.size();
  GlauberMatrix gm;
  gm.state_codes.reserve(states);
  gm.pi.reserve(states);
  for (const auto& [code, count] : nu.entries) {
    gm.state_codes.push_back(code);
    gm.pi.push_back(static_cast<double>(count) / static_cast<double>(nu.total));
  }

  auto state_index = [&gm](int64_t code) -> int32_t {
    const auto it = std::lower_bound(gm.state_codes.begin(), gm.state_codes.end(), code);
    return it != gm.state_codes.end() && *it == code
               ? static_cast<int32_t>(it - gm.state_codes.begin())
               : -1;
  };

  std::vector<int64_t> weight(n);
  {
    int64_t w = 1;
    for (int v = 0; v < n; ++v) {
      weight[v] = w;
      w *= scheme.alphabet_size(v);
    }
  }

  gm.rows.assign(states, {});
  if (n == 0) {
    gm.rows[0] = {{0, 1.0}};
    return gm;
  }

  std::vector<double> row(states, 0.0);
  std::vector<int32_t> touched;
  for (size_t i = 0; i < states; ++i) {
    const int64_t code = gm.state_codes[i];
    const std::vector<Value> y = decode_tuple(code, scheme.alphabet_sizes());
    touched.clear();
    for (int v = 0; v < n; ++v) {
      const int32_t s = scheme.alphabet_size(v);
      int64_t margin = 0;
      for (Value c = 0; c < s; ++c)
        margin += nu.count_of(code + (c - y[v]) * weight[v]);
      for (Value c = 0; c < s; ++c) {
        const int64_t cnt = nu.count_of(code + (c - y[v]) * weight[v]);
        if (cnt == 0) continue;
        const int32_t j = state_index(code + (c - y[v]) * weight[v]);
        const double p = static_cast<double>(cnt) /
                         (static_cast<double>(margin) * static_cast<double>(n));
        if (row[j] == 0.0) touched.push_back(j);
        row[j] += p;
      }
    }
    std::sort(touched.begin(), touched.end());
    auto& sparse = gm.rows[i];
    sparse.reserve(touched.size());
    for (const int32_t j : touched) {
      sparse.emplace_back(j, row[j]);
      row[j] = 0.0;
    }
  }
  return gm;
}

double GlauberMatrix::max_row_sum_error() const {
  double err = 0;
  for (const auto& sparse : rows) {
    double sum = 0;
    for (const auto& [j, p] : sparse) sum += p;
    err = std::max(err, std::abs(sum - 1.0));
  }
  return err;
}

double GlauberMatrix::max_detailed_balance_error() const {
  double err = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [j, p] : rows[i]) {
      const auto& back = rows[j];
      const auto it = std::lower_bound(back.begin(), back.end(), static_cast<int32_t>(i),
                                       [](const auto& e, int32_t k) { return e.first < k; });
      const double q = it != back.end() && it->first == static_cast<int32_t>(i) ? it->second : 0.0;
      err = std::max(err, std::abs(pi[i] * p - pi[j] * q));
    }
  }
  return err;
}

double GlauberMatrix::stationary_residual() const {
  std::vector<double> acc(pi.size(), 0.0);
  for (size_t i = 0; i < rows.size(); ++i)
    for (const auto& [j, p] : rows[i]) acc[j] += pi[i] * p;
  double err = 0;
  for (size_t j = 0; j < pi.size(); ++j) err = std::max(err, std::abs(acc[j] - pi[j]));
  return err;
}

namespace {

// regularised incomplete gamma: series for P(a,x), Lentz continued fraction
// for Q(a,x)
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double chi_square_pvalue(double statistic, double dof) {
  if (dof <= 0) return 1.0;
  if (std::isinf(statistic)) return 0.0;
  if (!(statistic > 0)) return 1.0;
  const double a = dof / 2.0, x = statistic / 2.0;
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_cf(a, x);
}

DistanceReport tv_distance(const std::vector<std::pair<int64_t, int64_t>>& empirical,
                           const CountTable& exact) {
  DistanceReport rep;
  for (const auto& [code, count] : empirical) rep.sample_size += count;
  if (rep.sample_size == 0) throw SampleSizeZero("empirical distribution is empty");

  std::vector<std::pair<int64_t, int64_t>> emp = empirical;
  std::sort(emp.begin(), emp.end());

  const double N = static_cast<double>(rep.sample_size);
  const double total = static_cast<double>(exact.total);

  double l1 = 0;
  bool outside = false;
  size_t ei = 0;
  for (const auto& [code, count] : exact.entries) {
    while (ei < emp.size() && emp[ei].first < code) {
      l1 += static_cast<double>(emp[ei].second) / N;  // empirical mass off-support
      outside = true;
      ++ei;
    }
    const double p = static_cast<double>(count) / total;
    double phat = 0;
    if (ei < emp.size() && emp[ei].first == code) {
      phat = static_cast<double>(emp[ei].second) / N;
      ++ei;
    }
    l1 += std::abs(phat - p);
    const double expected = N * p;
    rep.chi_square += (phat * N - expected) * (phat * N - expected) / expected;
  }
  for (; ei < emp.size(); ++ei) {
    l1 += static_cast<double>(emp[ei].second) / N;
    outside = true;
  }
  rep.tv = l1 / 2.0;
  rep.df = static_cast<int64_t>(exact.entries.size()) - 1;
  if (outside) rep.chi_square = std::numeric_limits<double>::infinity();
  rep.p_value = chi_square_pvalue(rep.chi_square, static_cast<double>(rep.df));
  return rep;
}

}  // namespace cspsamp
