// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cellcount/formula.hpp"

namespace cellcount {

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Chronological DPLL over clauses and XOR rows. Decision order is static:
// the projection variables ascending, then the rest ascending, always
// trying false first. XOR rows are reduced by Gauss-Jordan up front, each
// pivot being the row's variable decided last, and then propagated by
// per-row unassigned counters after every assignment.
//
// Enumeration continues the same search after each model: the blocking
// clause over the projection variables is added in memory and the
// deepest open projection decision is flipped.
class Dpll {
 public:
  Dpll(std::uint32_t num_vars, std::vector<Var> projection);

  void add_clause(const Clause& c);
  void add_xor(const XorClause& x);
  void add_formula(const CnfFormula& f);

  // 0 means unlimited.
  void set_decision_budget(std::uint64_t b) { budget_ = b; }

  // Visits projection-distinct models until the callback returns false.
  // Single use.
  void enumerate(const std::function<bool(const Assignment&)>& on_model);
  std::optional<Assignment> solve_one();

  std::uint64_t decisions() const { return decisions_; }
  std::uint64_t conflicts() const { return conflicts_; }

 private:
  struct XorRow {
    std::vector<Var> vars;
    bool rhs = false;
    std::uint32_t unassigned = 0;
    bool parity = false;
  };

  std::int8_t lit_value(Lit l) const {
    const std::int8_t v = value_[l.var()];
    return v < 0 ? v : static_cast<std::int8_t>(v != static_cast<std::int8_t>(l.negative()));
  }
  std::uint32_t level() const { return static_cast<std::uint32_t>(trail_lim_.size()); }

  bool init();
  void assign(Lit l);
  void unassign(Var v);
  bool propagate();
  void undo_to(std::uint32_t lvl);
  bool backtrack();
  void attach(std::uint32_t ci);
  Var next_decision();

  std::uint32_t n_;
  std::vector<Var> projection_;
  std::vector<Var> order_;
  std::vector<std::uint32_t> pos_;
  std::size_t hint_ = 0;

  std::vector<Clause> clauses_;
  std::vector<std::vector<std::uint32_t>> watches_;
  std::vector<XorClause> raw_xors_;
  std::vector<XorRow> xrows_;
  std::vector<std::vector<std::uint32_t>> var_rows_;
  std::vector<Lit> xq_;
  bool xor_conflict_ = false;

  std::vector<std::int8_t> value_;
  std::vector<std::uint32_t> var_level_;
  std::vector<Var> trail_;
  std::vector<std::size_t> trail_lim_;
  std::vector<bool> flipped_;
  std::size_t qhead_ = 0;
  bool root_unsat_ = false;
  bool used_ = false;

  std::uint64_t decisions_ = 0;
  std::uint64_t conflicts_ = 0;
  std::uint64_t budget_ = 0;
};

}  // namespace cellcount
