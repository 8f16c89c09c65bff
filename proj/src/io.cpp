#include "cspsamp/io.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include <json.hpp>

namespace cspsamp {

namespace {

struct Line {
  int number = 0;
  std::string_view text;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t nl = text.find('\n', pos);
    const size_t end = nl == std::string_view::npos ? text.size() : nl;
    ++number;
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back({number, line});
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> tokens_of(std::string_view line) {
  std::vector<std::string_view> toks;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) toks.push_back(line.substr(i, j - i));
    i = j;
  }
  return toks;
}

int64_t parse_int(std::string_view tok, int line) {
  int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(line, "expected an integer, got '" + std::string(tok) + "'");
  return value;
}

bool blank(std::string_view line) { return tokens_of(line).empty(); }

bool dimacs_comment(std::string_view line) {
  return !line.empty() && line[0] == 'c' && (line.size() == 1 || line[1] == ' ' || line[1] == '\t');
}

bool hash_comment(std::string_view line) { return !line.empty() && line[0] == '#'; }

}  // namespace

InstanceDocument parse_dimacs_cnf(std::string_view text) {
  InstanceDocument doc;
  doc.cls = InstanceClass::cnf;

  const std::vector<Line> lines = split_lines(text);
  size_t li = 0;
  int n = 0, m = 0;
  bool header = false;
  for (; li < lines.size(); ++li) {
    if (blank(lines[li].text) || dimacs_comment(lines[li].text)) continue;
    const auto toks = tokens_of(lines[li].text);
    if (toks.size() != 4 || toks[0] != "p" || toks[1] != "cnf")
      throw ParseError(lines[li].number, "expected 'p cnf <vars> <clauses>'");
    n = static_cast<int>(parse_int(toks[2], lines[li].number));
    m = static_cast<int>(parse_int(toks[3], lines[li].number));
    if (n < 0 || m < 0) throw ParseError(lines[li].number, "negative header counts");
    header = true;
    ++li;
    break;
  }
  if (!header) throw ParseError(static_cast<int>(lines.size()), "missing 'p cnf' header");

  // literal stream; clauses may span lines
  std::vector<int32_t> clause;
  int clause_line = 0;
  std::vector<std::vector<int32_t>> clauses;
  for (; li < lines.size(); ++li) {
    if (blank(lines[li].text) || dimacs_comment(lines[li].text)) continue;
    for (const auto tok : tokens_of(lines[li].text)) {
      const int64_t lit = parse_int(tok, lines[li].number);
      if (clause.empty()) clause_line = lines[li].number;
      if (lit == 0) {
        if (clause.empty()) throw EmptyClause(lines[li].number, "empty clause");
        if (static_cast<int>(clauses.size()) == m)
          throw ParseError(lines[li].number, "more clauses than the header declares");
        clauses.push_back(clause);
        clause.clear();
        continue;
      }
      const int64_t v = lit > 0 ? lit : -lit;
      if (v < 1 || v > n) throw ParseError(lines[li].number, "literal variable out of range");
      clause.push_back(static_cast<int32_t>(lit));
    }
  }
  if (!clause.empty()) throw ParseError(lines.back().number, "unterminated clause");
  if (static_cast<int>(clauses.size()) != m)
    throw ParseError(lines.back().number, "fewer clauses than the header declares");

  std::vector<AtomicConstraint> constraints;
  for (auto& lits : clauses) {
    std::vector<int32_t> kept;
    bool tautology = false;
    for (const int32_t lit : lits) {
      if (std::find(kept.begin(), kept.end(), lit) != kept.end()) continue;  // dedup
      if (std::find(kept.begin(), kept.end(), -lit) != kept.end()) {
        tautology = true;
        break;
      }
      kept.push_back(lit);
    }
    if (tautology) {
      doc.warnings.push_back("tautological clause dropped");
      continue;
    }
    AtomicConstraint c;
    for (const int32_t lit : kept) {
      c.scope.push_back(std::abs(lit) - 1);
      c.forbidden.push_back(lit > 0 ? 0 : 1);  // the single falsifying point
    }
    doc.clauses.push_back(std::move(kept));
    constraints.push_back(std::move(c));
  }

  std::vector<int32_t> occurrences(n, 0);
  for (const auto& c : constraints) {
    doc.cnf_k = std::max(doc.cnf_k, static_cast<int>(c.scope.size()));
    for (const int32_t v : c.scope) ++occurrences[v];
  }
  doc.cnf_d = occurrences.empty() ? 0 : *std::max_element(occurrences.begin(), occurrences.end());

  doc.formula = build_formula(n, std::vector<int32_t>(n, 2), std::move(constraints));
  return doc;
}

InstanceDocument parse_hypergraph(std::string_view text) {
  InstanceDocument doc;
  doc.cls = InstanceClass::coloring;

  const std::vector<Line> lines = split_lines(text);
  size_t li = 0;
  int n = 0, m = 0, q = 0;
  bool header = false;
  for (; li < lines.size(); ++li) {
    if (blank(lines[li].text) || hash_comment(lines[li].text)) continue;
    const auto toks = tokens_of(lines[li].text);
    if (toks.size() != 5 || toks[0] != "p" || toks[1] != "hyp")
      throw ParseError(lines[li].number, "expected 'p hyp <vertices> <edges> <colours>'");
    n = static_cast<int>(parse_int(toks[2], lines[li].number));
    m = static_cast<int>(parse_int(toks[3], lines[li].number));
    q = static_cast<int>(parse_int(toks[4], lines[li].number));
    if (n < 0 || m < 0) throw ParseError(lines[li].number, "negative header counts");
    if (q < 2) throw ParseError(lines[li].number, "colour count must be at least 2");
    header = true;
    ++li;
    break;
  }
  if (!header) throw ParseError(static_cast<int>(lines.size()), "missing 'p hyp' header");

  for (; li < lines.size() && static_cast<int>(doc.edges.size()) < m; ++li) {
    if (blank(lines[li].text) || hash_comment(lines[li].text)) continue;
    const auto toks = tokens_of(lines[li].text);
    std::vector<int32_t> edge;
    for (const auto tok : toks) {
      const int64_t u = parse_int(tok, lines[li].number);
      if (u < 1 || u > n)
        throw VertexOutOfRange(lines[li].number, "vertex " + std::to_string(u));
      const int32_t v = static_cast<int32_t>(u - 1);
      if (std::find(edge.begin(), edge.end(), v) != edge.end())
        throw ParseError(lines[li].number, "repeated vertex in edge");
      edge.push_back(v);
    }
    if (edge.empty()) throw ParseError(lines[li].number, "empty edge");
    doc.edges.push_back(std::move(edge));
  }
  for (; li < lines.size(); ++li)
    if (!blank(lines[li].text) && !hash_comment(lines[li].text))
      throw ParseError(lines[li].number, "more edges than the header declares");
  if (static_cast<int>(doc.edges.size()) != m)
    throw ParseError(static_cast<int>(lines.size()), "fewer edges than the header declares");

  doc.hyp_q = q;
  std::vector<int32_t> degree(n, 0);
  std::vector<AtomicConstraint> constraints;
  for (const auto& edge : doc.edges) {
    doc.hyp_k_min = doc.hyp_k_min == 0 ? static_cast<int>(edge.size())
                                       : std::min(doc.hyp_k_min, static_cast<int>(edge.size()));
    doc.hyp_k_max = std::max(doc.hyp_k_max, static_cast<int>(edge.size()));
    for (const int32_t v : edge) ++degree[v];
    for (int colour = 0; colour < q; ++colour) {
      AtomicConstraint c;
      c.scope = edge;
      c.forbidden.assign(edge.size(), colour);
      constraints.push_back(std::move(c));
    }
  }
  doc.hyp_Delta = degree.empty() ? 0 : *std::max_element(degree.begin(), degree.end());
  doc.formula = build_formula(n, std::vector<int32_t>(n, q), std::move(constraints));
  return doc;
}

InstanceDocument parse_atomic_csp(std::string_view text) {
  InstanceDocument doc;
  doc.cls = InstanceClass::general;

  const std::vector<Line> lines = split_lines(text);
  size_t li = 0;
  int n = 0;
  bool header = false;
  for (; li < lines.size(); ++li) {
    if (blank(lines[li].text) || hash_comment(lines[li].text)) continue;
    const auto toks = tokens_of(lines[li].text);
    if (toks.size() != 3 || toks[0] != "p" || toks[1] != "acsp")
      throw ParseError(lines[li].number, "expected 'p acsp <vars>'");
    n = static_cast<int>(parse_int(toks[2], lines[li].number));
    if (n < 0) throw ParseError(lines[li].number, "negative variable count");
    header = true;
    ++li;
    break;
  }
  if (!header) throw ParseError(static_cast<int>(lines.size()), "missing 'p acsp' header");

  std::vector<int32_t> domains;
  bool have_domains = false;
  std::vector<AtomicConstraint> constraints;
  for (; li < lines.size(); ++li) {
    if (blank(lines[li].text) || hash_comment(lines[li].text)) continue;
    const auto toks = tokens_of(lines[li].text);
    const int ln = lines[li].number;
    if (toks[0] == "d") {
      if (have_domains) throw ParseError(ln, "repeated domain line");
      if (static_cast<int>(toks.size()) - 1 != n)
        throw ParseError(ln, "domain line must list one size per variable");
      for (size_t i = 1; i < toks.size(); ++i) {
        const int64_t q = parse_int(toks[i], ln);
        if (q < 2) throw ParseError(ln, "domain size must be at least 2");
        domains.push_back(static_cast<int32_t>(q));
      }
      have_domains = true;
    } else if (toks[0] == "c") {
      if (!have_domains) throw ParseError(ln, "constraint before the domain line");
      AtomicConstraint c;
      for (size_t i = 1; i < toks.size(); ++i) {
        const std::string_view tok = toks[i];
        const size_t colon = tok.find(':');
        if (colon == std::string_view::npos)
          throw ParseError(ln, "expected 'var:value', got '" + std::string(tok) + "'");
        const int64_t v = parse_int(tok.substr(0, colon), ln);
        const int64_t a = parse_int(tok.substr(colon + 1), ln);
        if (v < 1 || v > n) throw ParseError(ln, "variable " + std::to_string(v) + " out of range");
        if (a < 0 || a >= domains[v - 1])
          throw ParseError(ln, "value " + std::to_string(a) + " outside the domain of variable " +
                                   std::to_string(v));
        if (std::find(c.scope.begin(), c.scope.end(), static_cast<int32_t>(v - 1)) !=
            c.scope.end())
          throw ParseError(ln, "repeated variable in constraint");
        c.scope.push_back(static_cast<int32_t>(v - 1));
        c.forbidden.push_back(static_cast<Value>(a));
      }
      constraints.push_back(std::move(c));
    } else {
      throw ParseError(ln, "unrecognised line '" + std::string(toks[0]) + "'");
    }
  }
  if (!have_domains && n > 0)
    throw ParseError(static_cast<int>(lines.size()), "missing domain line");
  if (!have_domains) domains.assign(n, 2);

  doc.formula = build_formula(n, std::move(domains), std::move(constraints));
  return doc;
}

InstanceDocument parse_instance(std::string_view text) {
  for (const Line& line : split_lines(text)) {
    if (blank(line.text) || hash_comment(line.text) || dimacs_comment(line.text)) continue;
    const auto toks = tokens_of(line.text);
    if (toks[0] != "p") throw ParseError(line.number, "expected a 'p <format> ...' header");
    if (toks.size() < 2) throw ParseError(line.number, "truncated header");
    if (toks[1] == "cnf") return parse_dimacs_cnf(text);
    if (toks[1] == "hyp") return parse_hypergraph(text);
    if (toks[1] == "acsp") return parse_atomic_csp(text);
    throw ParseError(line.number, "unknown format '" + std::string(toks[1]) + "'");
  }
  throw ParseError(1, "empty input");
}

std::string serialize_instance(const InstanceDocument& doc) {
  std::ostringstream out;
  switch (doc.cls) {
    case InstanceClass::cnf: {
      out << "p cnf " << doc.formula.num_vars() << ' ' << doc.clauses.size() << '\n';
      for (const auto& clause : doc.clauses) {
        for (const int32_t lit : clause) out << lit << ' ';
        out << "0\n";
      }
      break;
    }
    case InstanceClass::coloring: {
      out << "p hyp " << doc.formula.num_vars() << ' ' << doc.edges.size() << ' ' << doc.hyp_q
          << '\n';
      for (const auto& edge : doc.edges) {
        for (size_t i = 0; i < edge.size(); ++i) out << (i ? " " : "") << edge[i] + 1;
        out << '\n';
      }
      break;
    }
    case InstanceClass::general: {
      out << "p acsp " << doc.formula.num_vars() << '\n';
      out << 'd';
      for (int v = 0; v < doc.formula.num_vars(); ++v) out << ' ' << doc.formula.domain_size(v);
      out << '\n';
      for (const AtomicConstraint& c : doc.formula.constraints()) {
        out << 'c';
        for (size_t i = 0; i < c.scope.size(); ++i)
          out << ' ' << c.scope[i] + 1 << ':' << c.forbidden[i];
        out << '\n';
      }
      break;
    }
  }
  return out.str();
}

std::string serialize_scheme(const std::vector<int32_t>& alphabet_sizes) {
  std::ostringstream out;
  out << 's';
  for (const int32_t s : alphabet_sizes) out << ' ' << s;
  out << '\n';
  return out.str();
}

std::vector<int32_t> parse_scheme(std::string_view text, int num_vars) {
  for (const Line& line : split_lines(text)) {
    if (blank(line.text) || hash_comment(line.text)) continue;
    const auto toks = tokens_of(line.text);
    if (toks[0] != "s") throw ParseError(line.number, "expected 's s_1 ... s_n'");
    if (static_cast<int>(toks.size()) - 1 != num_vars)
      throw ParseError(line.number, "scheme lists " + std::to_string(toks.size() - 1) +
                                        " sizes for " + std::to_string(num_vars) + " variables");
    std::vector<int32_t> sizes;
    for (size_t i = 1; i < toks.size(); ++i) {
      const int64_t s = parse_int(toks[i], line.number);
      if (s < 1) throw ParseError(line.number, "alphabet size must be positive");
      sizes.push_back(static_cast<int32_t>(s));
    }
    return sizes;
  }
  throw ParseError(1, "no scheme line found");
}

std::string emit_samples_lines(const std::vector<Assignment>& samples) {
  std::ostringstream out;
  for (const Assignment& x : samples) {
    for (size_t v = 0; v < x.size(); ++v) out << (v ? " " : "") << x[v];
    out << '\n';
  }
  return out.str();
}

namespace {

nlohmann::ordered_json schedule_json(const SamplerSchedule& s) {
  nlohmann::ordered_json j;
  j["eps"] = s.eps;
  j["T"] = s.T;
  j["delta"] = s.delta;
  j["eta"] = s.eta;
  j["R"] = s.R;
  j["L"] = s.L;
  j["seed"] = s.seed;
  j["mode"] = s.mode == SamplerMode::strict ? "strict" : "forced";
  nlohmann::ordered_json o;
  o["T"] = s.T_overridden;
  o["eta"] = s.eta_overridden;
  o["delta"] = s.delta_overridden;
  o["R"] = s.R_overridden;
  o["L"] = s.L_overridden;
  j["overrides"] = o;
  return j;
}

}  // namespace

std::string schedule_to_json(const SamplerSchedule& schedule) {
  return schedule_json(schedule).dump();
}

std::string emit_samples_json(const std::vector<Assignment>& samples,
                              const SamplerSchedule& schedule, int64_t giant_exceptions,
                              int64_t overflow_exceptions) {
  nlohmann::ordered_json j;
  j["samples"] = samples;
  nlohmann::ordered_json meta;
  meta["seed"] = schedule.seed;
  meta["samples"] = samples.size();
  meta["schedule"] = schedule_json(schedule);
  nlohmann::ordered_json exc;
  exc["giant_component"] = giant_exceptions;
  exc["rejection_overflow"] = overflow_exceptions;
  meta["exceptions"] = exc;
  j["metadata"] = meta;
  return j.dump(2) + "\n";
}

}  // namespace cspsamp
