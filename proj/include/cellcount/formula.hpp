// SPDX-License-Identifier: MIT
//
// Propositional formulas, sampling sets, literal weights and the DIMACS
// dialect used by every tool in this package.
#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cellcount/bitvec.hpp"

namespace cellcount {

using BigInt = mpz_class;
using Rational = mpq_class;
using Var = std::uint32_t;

class Lit {
 public:
  Lit() = default;
  Lit(Var v, bool negative) : code_((v << 1) | (negative ? 1U : 0U)) {}
  static Lit from_dimacs(long long d) {
    return d < 0 ? Lit(static_cast<Var>(-d), true) : Lit(static_cast<Var>(d), false);
  }
  static Lit from_code(std::uint32_t c) {
    Lit l;
    l.code_ = c;
    return l;
  }

  Var var() const { return code_ >> 1; }
  bool negative() const { return code_ & 1U; }
  std::uint32_t code() const { return code_; }
  long long to_dimacs() const {
    return negative() ? -static_cast<long long>(var()) : static_cast<long long>(var());
  }
  Lit operator~() const { return from_code(code_ ^ 1U); }

  // Truth value of the literal under `value` of its variable.
  bool holds(bool value) const { return value != negative(); }

  friend bool operator==(Lit a, Lit b) { return a.code_ == b.code_; }
  friend bool operator!=(Lit a, Lit b) { return a.code_ != b.code_; }
  friend bool operator<(Lit a, Lit b) { return a.code_ < b.code_; }

 private:
  std::uint32_t code_ = 0;
};

using Clause = std::vector<Lit>;

// XOR of `vars` equals `parity`. Variables are sorted and distinct.
// An empty variable list with parity 1 is unsatisfiable.
struct XorClause {
  std::vector<Var> vars;
  bool parity = false;

  bool is_contradiction() const { return vars.empty() && parity; }
  bool is_tautology() const { return vars.empty() && !parity; }
  friend bool operator==(const XorClause&, const XorClause&) = default;
};

// Sorts, cancels repeated variables pairwise.
XorClause make_xor(std::vector<Var> vars, bool parity);

struct CnfFormula {
  std::uint32_t num_vars = 0;
  std::vector<Clause> clauses;
  std::vector<XorClause> xors;

  friend bool operator==(const CnfFormula&, const CnfFormula&) = default;
};

struct DnfFormula {
  std::uint32_t num_vars = 0;
  std::vector<Clause> cubes;

  friend bool operator==(const DnfFormula&, const DnfFormula&) = default;
};

using Formula = std::variant<CnfFormula, DnfFormula>;

std::uint32_t num_vars(const Formula& f);
bool is_dnf(const Formula& f);

// Ordered, duplicate-free.
using SamplingSet = std::vector<Var>;

SamplingSet all_vars(std::uint32_t n);

struct Dyadic {
  std::uint64_t k = 0;  // odd
  unsigned m = 0;       // k < 2^m

  friend bool operator==(const Dyadic&, const Dyadic&) = default;
};

struct LiteralWeight {
  Rational positive;            // W(x = 1), strictly inside (0, 1)
  std::optional<Dyadic> dyadic;  // set iff positive == k / 2^m with m <= 16

  friend bool operator==(const LiteralWeight&, const LiteralWeight&) = default;
};

inline constexpr unsigned kMaxDyadicBits = 16;

std::optional<Dyadic> dyadic_form(const Rational& w);

// Variables absent from the map are indifferent: both literals weigh 1.
class WeightMap {
 public:
  void set(Var v, const Rational& positive);
  const LiteralWeight* find(Var v) const;
  bool empty() const { return normal_.empty(); }
  std::size_t size() const { return normal_.size(); }
  const std::map<Var, LiteralWeight>& entries() const { return normal_; }

  Rational literal_weight(Lit l) const;
  bool all_dyadic() const;
  // Sum of dyadic bit widths over normal-weighted variables.
  unsigned m_hat() const;
  // 2^-m_hat.
  Rational c_f() const;

  friend bool operator==(const WeightMap&, const WeightMap&) = default;

 private:
  std::map<Var, LiteralWeight> normal_;
};

// Total assignment; bit v holds the value of variable v (bit 0 unused).
using Assignment = BitVec;

Assignment make_assignment(std::uint32_t num_vars);

// Values of S's variables in S order.
BitVec project(const Assignment& a, const SamplingSet& s);

bool satisfies(const Clause& c, const Assignment& a);
bool cube_holds(const Clause& cube, const Assignment& a);
bool satisfies(const XorClause& x, const Assignment& a);
bool satisfies(const CnfFormula& f, const Assignment& a);
bool satisfies(const DnfFormula& f, const Assignment& a);
bool satisfies(const Formula& f, const Assignment& a);
bool satisfies_all(const std::vector<XorClause>& xs, const Assignment& a);

struct ProblemInstance {
  Formula formula;
  SamplingSet sampling;
  WeightMap weights;

  std::uint32_t num_vars() const { return cellcount::num_vars(formula); }
  friend bool operator==(const ProblemInstance&, const ProblemInstance&) = default;
};

ProblemInstance make_instance(Formula f);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

ProblemInstance parse_dimacs(std::string_view text);
std::string serialize_dimacs(const ProblemInstance& p);

// Writes a rational with a terminating decimal expansion exactly.
// Throws std::invalid_argument when the expansion does not terminate.
std::string exact_decimal(const Rational& q);
// Parses "0.3125"-style decimals exactly.
std::optional<Rational> parse_decimal(std::string_view s);

// F plus the clause excluding every extension of sigma_s.
CnfFormula block_assignment(const CnfFormula& f, const SamplingSet& s, const BitVec& sigma_s);
Clause blocking_clause(const SamplingSet& s, const BitVec& sigma_s);

Rational assignment_weight(const WeightMap& w, const Assignment& a);

}  // namespace cellcount
