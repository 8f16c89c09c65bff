#include "cspsamp/regimes.hpp"

#include <cmath>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace cspsamp {

namespace {

constexpr double kTol = 1e-9;

double log2_or_zero(int64_t x) { return x > 0 ? std::log2(static_cast<double>(x)) : 0.0; }

}  // namespace

RegimeReport check_general(double log2_inv_p, int64_t D, double zeta) {
  RegimeReport r;
  r.inequality = "ln(1/p) >= 350 ln(D) + 3 ln(1/zeta), zeta in (0, 2^-400]";
  const bool zeta_ok = zeta > 0 && zeta <= std::ldexp(1.0, -400);
  r.lhs_bits = log2_inv_p;
  r.rhs_bits = 350.0 * log2_or_zero(D) + (zeta > 0 ? 3.0 * std::log2(1.0 / zeta) : 0.0);
  r.margin_bits = r.lhs_bits - r.rhs_bits;
  r.pass = zeta_ok && r.margin_bits >= 0;
  if (!zeta_ok) r.inequality += " [zeta out of range]";
  return r;
}

RegimeReport check_coloring(int64_t k, int64_t Delta, int64_t q) {
  RegimeReport r;
  r.inequality = "k >= 13 and q >= max((7 k Delta)^(9/(k-12)), 650)";
  r.lhs_bits = log2_or_zero(q);
  if (k < 13) {
    r.rhs_bits = std::numeric_limits<double>::infinity();
    r.margin_bits = -std::numeric_limits<double>::infinity();
    r.pass = false;
    return r;
  }
  const double expo = 9.0 / (static_cast<double>(k) - 12.0);
  const double power_bits =
      Delta > 0 ? expo * std::log2(7.0 * static_cast<double>(k) * static_cast<double>(Delta))
                : -std::numeric_limits<double>::infinity();
  r.rhs_bits = std::max(power_bits, std::log2(650.0));
  r.margin_bits = r.lhs_bits - r.rhs_bits;
  r.pass = r.margin_bits >= 0;

  r.simplified_applicable = k >= 30;
  if (r.simplified_applicable) {
    const double dpow = Delta > 0 ? std::exp2(expo * std::log2(static_cast<double>(Delta))) : 0.0;
    r.simplified_threshold = 15.0 * dpow + 650.0;
    r.simplified_pass = static_cast<double>(q) >= r.simplified_threshold;
  }
  return r;
}

RegimeReport check_cnf(int64_t k, int64_t d, double zeta) {
  RegimeReport r;
  r.inequality = "k >= 13 log2(d) + 13 log2(k) + 3 log2(1/zeta), zeta in (0, 2^-20]";
  const bool zeta_ok = zeta > 0 && zeta <= std::ldexp(1.0, -20);
  r.lhs_bits = static_cast<double>(k);
  r.rhs_bits = 13.0 * log2_or_zero(d) + 13.0 * log2_or_zero(k) +
               (zeta > 0 ? 3.0 * std::log2(1.0 / zeta) : 0.0);
  r.margin_bits = r.lhs_bits - r.rhs_bits;
  r.pass = zeta_ok && r.margin_bits >= 0;
  if (!zeta_ok) r.inequality += " [zeta out of range]";
  return r;
}

AlphaBeta default_alpha_beta(InstanceClass cls) {
  switch (cls) {
    case InstanceClass::general: return {0.994, 0.577};
    case InstanceClass::coloring: return {7.0 / 9.0, 2.0 / 3.0};
    case InstanceClass::cnf: return {21.0 / 25.0, 0.5};
  }
  return {0.994, 0.577};
}

double default_zeta(InstanceClass cls) {
  switch (cls) {
    case InstanceClass::general: return std::ldexp(1.0, -400);
    case InstanceClass::cnf: return std::ldexp(1.0, -20);
    case InstanceClass::coloring: return 0.0;  // eta is direct, no zeta
  }
  return 0.0;
}

double class_eta(const ClassProfile& profile) {
  switch (profile.cls) {
    case InstanceClass::general:
      return profile.zeta / 3.0;
    case InstanceClass::coloring: {
      const double qkD = static_cast<double>(profile.q) * static_cast<double>(profile.k) *
                         static_cast<double>(profile.Delta);
      return qkD > 0 ? 1.0 / (512.0 * std::pow(qkD, 4.0)) : 0.0;
    }
    case InstanceClass::cnf: {
      const double dk = std::pow(static_cast<double>(profile.d), 4.0) *
                        std::pow(static_cast<double>(profile.k), 4.0);
      return dk > 0 ? profile.zeta / (3.0 * dk) : 0.0;
    }
  }
  return 0.0;
}

PreconditionReport check_projection_precondition(InstanceClass cls, const FormulaStats& stats,
                                                 double alpha, double beta) {
  if (!(beta > 0) || !(alpha > beta) || !(alpha < 1))
    throw InvalidAlphaBeta("need 0 < beta < alpha < 1");

  PreconditionReport rep;

  {
    ConstructorPrecondition& p = rep.interval;
    p.applicable = stats.homogeneous_domains && stats.num_vars > 0;
    const double q = static_cast<double>(stats.max_domain);
    if (p.applicable) {
      const double mid = std::pow(q, (alpha + beta) / 2.0);
      const double m1 = std::log2(mid) - std::log2(7.0);
      const double m2 = std::log2(q / 6.0) - std::log2(mid);
      const double m3 = std::log2(q) - 1.0 / (alpha - beta);
      p.margin_bits = std::min({m1, m2, m3});
      p.pass = p.margin_bits >= -kTol;
      p.detail = "7 <= q^((alpha+beta)/2) <= q/6 and log2 q >= 1/(alpha-beta)";
    } else {
      p.detail = "needs a homogeneous domain";
    }
  }

  {
    ConstructorPrecondition& p = rep.marking;
    p.applicable = stats.homogeneous_domains && stats.uniform_width && stats.max_width >= 1;
    if (p.applicable) {
      const double k = stats.max_width;
      const double d = std::max<int32_t>(stats.max_var_degree, 1);
      const double bound = (2.0 * std::log(2.0) / ((alpha - beta) * (alpha - beta))) *
                           std::log2(2.0 * std::exp(1.0) * k * d);
      p.margin_bits = k - bound;  // width units
      p.pass = p.margin_bits >= -kTol;
      p.detail = "k >= (2 ln2/(alpha-beta)^2) log2(2 e k d)";
    } else {
      p.detail = "needs homogeneous domain and uniform width";
    }
  }

  {
    ConstructorPrecondition& p = rep.general;
    p.applicable = true;
    const double need = 25.0 / std::pow(alpha - beta, 3.0) * (log2_or_zero(stats.max_degree) + 3.0);
    p.margin_bits = stats.log2_inv_p - need;
    p.pass = p.margin_bits >= -kTol;
    p.detail = "log2(1/p) >= 25/(alpha-beta)^3 (log2 D + 3)";
  }

  auto pick = [&rep](std::initializer_list<const char*> order) {
    for (const char* name : order) {
      const ConstructorPrecondition& p = std::string_view(name) == "interval"  ? rep.interval
                                         : std::string_view(name) == "marking" ? rep.marking
                                                                               : rep.general;
      if (p.applicable && p.pass) return name;
    }
    return "none";
  };
  switch (cls) {
    case InstanceClass::cnf: rep.recommended = pick({"marking", "general", "interval"}); break;
    case InstanceClass::coloring: rep.recommended = pick({"interval", "marking", "general"}); break;
    case InstanceClass::general: rep.recommended = pick({"general", "interval", "marking"}); break;
  }
  return rep;
}

}  // namespace cspsamp
