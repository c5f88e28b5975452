// SPDX-License-Identifier: MIT
#include "cellcount/formula.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace cellcount {

XorClause make_xor(std::vector<Var> vars, bool parity) {
  std::sort(vars.begin(), vars.end());
  XorClause x;
  x.parity = parity;
  for (std::size_t i = 0; i < vars.size();) {
    std::size_t j = i;
    while (j < vars.size() && vars[j] == vars[i]) ++j;
    if ((j - i) % 2 == 1) x.vars.push_back(vars[i]);
    i = j;
  }
  return x;
}

std::uint32_t num_vars(const Formula& f) {
  return std::visit([](const auto& g) { return g.num_vars; }, f);
}

bool is_dnf(const Formula& f) { return std::holds_alternative<DnfFormula>(f); }

SamplingSet all_vars(std::uint32_t n) {
  SamplingSet s(n);
  for (std::uint32_t i = 0; i < n; ++i) s[i] = i + 1;
  return s;
}

std::optional<Dyadic> dyadic_form(const Rational& w) {
  const BigInt& den = w.get_den();
  if (den <= 0) return std::nullopt;
  const std::size_t bits = mpz_sizeinbase(den.get_mpz_t(), 2);
  // den is a power of two iff it has exactly one set bit.
  if (mpz_popcount(den.get_mpz_t()) != 1) return std::nullopt;
  const unsigned m = static_cast<unsigned>(bits - 1);
  if (m > kMaxDyadicBits || m == 0) return std::nullopt;
  if (!w.get_num().fits_ulong_p()) return std::nullopt;
  return Dyadic{w.get_num().get_ui(), m};
}

void WeightMap::set(Var v, const Rational& positive) {
  if (positive <= 0 || positive >= 1) throw std::invalid_argument("weight must lie strictly between 0 and 1");
  LiteralWeight lw;
  lw.positive = positive;
  lw.positive.canonicalize();
  lw.dyadic = dyadic_form(lw.positive);
  normal_[v] = lw;
}

const LiteralWeight* WeightMap::find(Var v) const {
  auto it = normal_.find(v);
  return it == normal_.end() ? nullptr : &it->second;
}

Rational WeightMap::literal_weight(Lit l) const {
  const LiteralWeight* w = find(l.var());
  if (w == nullptr) return Rational(1);
  return l.negative() ? Rational(1 - w->positive) : w->positive;
}

bool WeightMap::all_dyadic() const {
  return std::all_of(normal_.begin(), normal_.end(), [](const auto& e) { return e.second.dyadic.has_value(); });
}

unsigned WeightMap::m_hat() const {
  unsigned s = 0;
  for (const auto& [v, w] : normal_) {
    if (!w.dyadic) throw std::invalid_argument("weight of variable " + std::to_string(v) + " is not dyadic");
    s += w.dyadic->m;
  }
  return s;
}

Rational WeightMap::c_f() const {
  BigInt den = 1;
  den <<= m_hat();
  return Rational(BigInt(1), den);
}

Assignment make_assignment(std::uint32_t num_vars) { return Assignment(static_cast<std::size_t>(num_vars) + 1); }

BitVec project(const Assignment& a, const SamplingSet& s) {
  BitVec p(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) p.set(i, a.get(s[i]));
  return p;
}

bool satisfies(const Clause& c, const Assignment& a) {
  return std::any_of(c.begin(), c.end(), [&](Lit l) { return l.holds(a.get(l.var())); });
}

bool cube_holds(const Clause& cube, const Assignment& a) {
  return std::all_of(cube.begin(), cube.end(), [&](Lit l) { return l.holds(a.get(l.var())); });
}

bool satisfies(const XorClause& x, const Assignment& a) {
  bool p = false;
  for (Var v : x.vars) p ^= a.get(v);
  return p == x.parity;
}

bool satisfies_all(const std::vector<XorClause>& xs, const Assignment& a) {
  return std::all_of(xs.begin(), xs.end(), [&](const XorClause& x) { return satisfies(x, a); });
}

bool satisfies(const CnfFormula& f, const Assignment& a) {
  for (const auto& c : f.clauses)
    if (!satisfies(c, a)) return false;
  return satisfies_all(f.xors, a);
}

bool satisfies(const DnfFormula& f, const Assignment& a) {
  return std::any_of(f.cubes.begin(), f.cubes.end(), [&](const Clause& c) { return cube_holds(c, a); });
}

bool satisfies(const Formula& f, const Assignment& a) {
  return std::visit([&](const auto& g) { return satisfies(g, a); }, f);
}

ProblemInstance make_instance(Formula f) {
  ProblemInstance p;
  p.sampling = all_vars(num_vars(f));
  p.formula = std::move(f);
  return p;
}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

std::optional<Rational> parse_decimal(std::string_view s) {
  std::string digits;
  std::size_t frac = 0;
  bool seen_point = false;
  for (char ch : s) {
    if (ch == '.') {
      if (seen_point) return std::nullopt;
      seen_point = true;
    } else if (std::isdigit(static_cast<unsigned char>(ch))) {
      digits.push_back(ch);
      if (seen_point) ++frac;
    } else {
      return std::nullopt;
    }
  }
  if (digits.empty()) return std::nullopt;
  BigInt num(digits, 10);
  BigInt den = 1;
  for (std::size_t i = 0; i < frac; ++i) den *= 10;
  Rational q(num, den);
  q.canonicalize();
  return q;
}

std::string exact_decimal(const Rational& q) {
  BigInt den = q.get_den();
  unsigned twos = 0, fives = 0;
  while (mpz_even_p(den.get_mpz_t())) {
    den /= 2;
    ++twos;
  }
  while (mpz_divisible_ui_p(den.get_mpz_t(), 5)) {
    den /= 5;
    ++fives;
  }
  if (den != 1) throw std::invalid_argument("rational has no terminating decimal expansion");
  const unsigned scale = std::max(twos, fives);
  BigInt scaled = q.get_num();
  for (unsigned i = 0; i < scale; ++i) scaled *= 10;
  scaled /= q.get_den();
  const bool neg = scaled < 0;
  if (neg) scaled = -scaled;
  std::string d = scaled.get_str();
  if (scale == 0) return (neg ? "-" : "") + d;
  if (d.size() <= scale) d.insert(0, scale + 1 - d.size(), '0');
  d.insert(d.size() - scale, ".");
  return (neg ? "-" : "") + d;
}

namespace {

struct Token {
  std::string_view text;
  std::size_t column;
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

std::optional<long long> to_int(std::string_view s) {
  long long v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (b != e && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) return std::nullopt;
  return v;
}

struct PendingWeight {
  Var var;
  Rational value;
  std::size_t line, column;
};

struct PendingVar {
  long long var;
  std::size_t line, column;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ProblemInstance run() {
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= text_.size()) {
      std::size_t nl = text_.find('\n', pos);
      if (nl == std::string_view::npos) nl = text_.size();
      std::string_view line = text_.substr(pos, nl - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      ++line_no;
      handle_line(line, line_no);
      pos = nl + 1;
    }
    if (!have_header_) throw ParseError(line_no, 1, "missing header line");
    if (!pending_.empty()) throw ParseError(pending_line_, pending_column_, "clause not terminated by 0");
    return finish();
  }

 private:
  void handle_line(std::string_view line, std::size_t ln) {
    auto toks = tokenize(line);
    if (toks.empty()) return;
    const std::string_view head = toks[0].text;
    if (head == "c") {
      handle_comment(toks, ln);
      return;
    }
    if (head == "p") {
      handle_header(toks, ln);
      return;
    }
    if (head == "%") return;  // SATLIB trailer
    if (!have_header_) throw ParseError(ln, toks[0].column, "clause before header");
    if (head[0] == 'x') {
      handle_xor(toks, ln);
      return;
    }
    for (const auto& t : toks) {
      auto v = to_int(t.text);
      if (!v) throw ParseError(ln, t.column, "expected integer literal, got '" + std::string(t.text) + "'");
      if (*v == 0) {
        close_clause(ln, t.column);
        continue;
      }
      check_range(*v, ln, t.column);
      if (pending_.empty()) {
        pending_line_ = ln;
        pending_column_ = t.column;
      }
      pending_.push_back(Lit::from_dimacs(*v));
    }
  }

  void check_range(long long v, std::size_t ln, std::size_t col) const {
    const long long a = v < 0 ? -v : v;
    if (a > static_cast<long long>(n_)) {
      throw ParseError(ln, col, "literal " + std::to_string(v) + " out of range 1.." + std::to_string(n_));
    }
  }

  void close_clause(std::size_t ln, std::size_t col) {
    if (dnf_) {
      Clause cube = pending_;
      std::sort(cube.begin(), cube.end());
      for (std::size_t i = 1; i < cube.size(); ++i) {
        if (cube[i].var() == cube[i - 1].var() && cube[i] != cube[i - 1]) {
          throw ParseError(ln, col, "cube contains a literal and its negation");
        }
      }
      dnf_cubes_.push_back(pending_);
    } else {
      cnf_.clauses.push_back(pending_);
    }
    pending_.clear();
  }

  void handle_header(const std::vector<Token>& toks, std::size_t ln) {
    if (have_header_) throw ParseError(ln, toks[0].column, "duplicate header");
    if (toks.size() != 4) throw ParseError(ln, toks[0].column, "malformed header: expected 'p cnf|dnf <vars> <clauses>'");
    if (toks[1].text == "cnf") {
      dnf_ = false;
    } else if (toks[1].text == "dnf") {
      dnf_ = true;
    } else {
      throw ParseError(ln, toks[1].column, "malformed header: unknown format '" + std::string(toks[1].text) + "'");
    }
    auto n = to_int(toks[2].text);
    auto m = to_int(toks[3].text);
    if (!n || *n < 0 || *n > 0xffffffffLL) throw ParseError(ln, toks[2].column, "malformed header: bad variable count");
    if (!m || *m < 0) throw ParseError(ln, toks[3].column, "malformed header: bad clause count");
    n_ = static_cast<std::uint32_t>(*n);
    have_header_ = true;
  }

  void handle_xor(const std::vector<Token>& toks, std::size_t ln) {
    if (dnf_) throw ParseError(ln, toks[0].column, "xor constraints are not allowed in DNF input");
    std::vector<Token> lits;
    if (toks[0].text.size() > 1) lits.push_back({toks[0].text.substr(1), toks[0].column + 1});
    for (std::size_t i = 1; i < toks.size(); ++i) lits.push_back(toks[i]);
    std::vector<Var> vars;
    bool parity = true;
    bool terminated = false;
    for (const auto& t : lits) {
      if (terminated) throw ParseError(ln, t.column, "tokens after terminating 0");
      auto v = to_int(t.text);
      if (!v) throw ParseError(ln, t.column, "expected integer literal, got '" + std::string(t.text) + "'");
      if (*v == 0) {
        terminated = true;
        continue;
      }
      check_range(*v, ln, t.column);
      if (*v < 0) parity = !parity;
      vars.push_back(static_cast<Var>(*v < 0 ? -*v : *v));
    }
    if (!terminated) throw ParseError(ln, toks.back().column, "xor line not terminated by 0");
    XorClause x = make_xor(std::move(vars), parity);
    if (!x.is_tautology()) cnf_.xors.push_back(std::move(x));
  }

  void handle_comment(const std::vector<Token>& toks, std::size_t ln) {
    if (toks.size() < 2) return;
    if (toks[1].text == "ind") {
      have_ind_ = true;
      for (std::size_t i = 2; i < toks.size(); ++i) {
        auto v = to_int(toks[i].text);
        if (!v || *v < 0) throw ParseError(ln, toks[i].column, "bad sampling-set variable '" + std::string(toks[i].text) + "'");
        if (*v == 0) break;
        ind_.push_back({*v, ln, toks[i].column});
      }
      return;
    }
    if (toks[1].text == "w") {
      if (toks.size() != 4) throw ParseError(ln, toks[0].column, "malformed weight line: expected 'c w <var> <decimal>'");
      auto v = to_int(toks[2].text);
      if (!v || *v <= 0) throw ParseError(ln, toks[2].column, "bad weight variable '" + std::string(toks[2].text) + "'");
      auto q = parse_decimal(toks[3].text);
      if (!q) throw ParseError(ln, toks[3].column, "bad decimal weight '" + std::string(toks[3].text) + "'");
      if (*q <= 0 || *q >= 1) throw ParseError(ln, toks[3].column, "weight outside (0,1)");
      weights_.push_back({static_cast<Var>(*v), *q, ln, toks[2].column});
    }
  }

  ProblemInstance finish() {
    ProblemInstance p;
    if (dnf_) {
      DnfFormula d;
      d.num_vars = n_;
      d.cubes = std::move(dnf_cubes_);
      p.formula = std::move(d);
    } else {
      cnf_.num_vars = n_;
      p.formula = std::move(cnf_);
    }
    if (have_ind_) {
      for (const auto& pv : ind_) {
        if (pv.var < 1 || pv.var > static_cast<long long>(n_)) {
          throw ParseError(pv.line, pv.column, "sampling-set variable " + std::to_string(pv.var) + " out of range");
        }
        p.sampling.push_back(static_cast<Var>(pv.var));
      }
      std::sort(p.sampling.begin(), p.sampling.end());
      p.sampling.erase(std::unique(p.sampling.begin(), p.sampling.end()), p.sampling.end());
    } else {
      p.sampling = all_vars(n_);
    }
    for (const auto& w : weights_) {
      if (w.var > n_) throw ParseError(w.line, w.column, "weight variable " + std::to_string(w.var) + " out of range");
      if (const LiteralWeight* prev = p.weights.find(w.var)) {
        if (prev->positive != w.value) {
          throw ParseError(w.line, w.column, "inconsistent duplicate weight for variable " + std::to_string(w.var));
        }
        continue;
      }
      p.weights.set(w.var, w.value);
    }
    return p;
  }

  std::string_view text_;
  bool have_header_ = false;
  bool dnf_ = false;
  std::uint32_t n_ = 0;
  CnfFormula cnf_;
  std::vector<Clause> dnf_cubes_;
  Clause pending_;
  std::size_t pending_line_ = 0, pending_column_ = 0;
  bool have_ind_ = false;
  std::vector<PendingVar> ind_;
  std::vector<PendingWeight> weights_;
};

void write_lits(std::ostringstream& os, const Clause& c) {
  for (Lit l : c) os << l.to_dimacs() << ' ';
  os << "0\n";
}

}  // namespace

ProblemInstance parse_dimacs(std::string_view text) { return Parser(text).run(); }

std::string serialize_dimacs(const ProblemInstance& p) {
  std::ostringstream os;
  const std::uint32_t n = p.num_vars();
  if (const auto* c = std::get_if<CnfFormula>(&p.formula)) {
    std::size_t nx = 0;
    for (const auto& x : c->xors) nx += x.is_tautology() ? 0 : 1;
    os << "p cnf " << n << ' ' << c->clauses.size() + nx << '\n';
  } else {
    os << "p dnf " << n << ' ' << std::get<DnfFormula>(p.formula).cubes.size() << '\n';
  }
  if (p.sampling != all_vars(n)) {
    os << "c ind";
    for (Var v : p.sampling) os << ' ' << v;
    os << " 0\n";
  }
  for (const auto& [v, w] : p.weights.entries()) os << "c w " << v << ' ' << exact_decimal(w.positive) << '\n';
  if (const auto* c = std::get_if<CnfFormula>(&p.formula)) {
    for (const auto& cl : c->clauses) write_lits(os, cl);
    for (const auto& x : c->xors) {
      if (x.is_tautology()) continue;
      os << 'x';
      for (std::size_t i = 0; i < x.vars.size(); ++i) {
        const bool neg = (i == 0) && !x.parity;
        os << ' ' << (neg ? "-" : "") << x.vars[i];
      }
      os << " 0\n";
    }
  } else {
    for (const auto& cube : std::get<DnfFormula>(p.formula).cubes) write_lits(os, cube);
  }
  return os.str();
}

Clause blocking_clause(const SamplingSet& s, const BitVec& sigma_s) {
  if (s.empty()) throw std::invalid_argument("cannot block an assignment over an empty sampling set");
  Clause c;
  c.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) c.push_back(Lit(s[i], sigma_s.get(i)));
  return c;
}

CnfFormula block_assignment(const CnfFormula& f, const SamplingSet& s, const BitVec& sigma_s) {
  CnfFormula g = f;
  g.clauses.push_back(blocking_clause(s, sigma_s));
  return g;
}

Rational assignment_weight(const WeightMap& w, const Assignment& a) {
  Rational r(1);
  for (const auto& [v, lw] : w.entries()) {
    if (a.get(v)) {
      r *= lw.positive;
    } else {
      r *= 1 - lw.positive;
    }
  }
  return r;
}

}  // namespace cellcount
