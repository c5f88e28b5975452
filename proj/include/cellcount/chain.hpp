// SPDX-License-Identifier: MIT
//
// Chain formulas and the exact reductions from literal-weighted and
// constraint-weighted model counting to unweighted counting.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cellcount/formula.hpp"

namespace cellcount {

// Small Boolean expression tree. Leaves are literals or constants.
struct BoolExpr {
  enum class Kind { Const, Lit, And, Or, Not, Xor };

  Kind kind = Kind::Const;
  bool value = true;
  cellcount::Lit lit;
  std::vector<BoolExpr> kids;

  static BoolExpr constant(bool v);
  static BoolExpr literal(cellcount::Lit l);
  static BoolExpr conj(std::vector<BoolExpr> kids);
  static BoolExpr disj(std::vector<BoolExpr> kids);
  static BoolExpr negation(BoolExpr e);
  static BoolExpr exclusive(std::vector<BoolExpr> kids);
  static BoolExpr iff(BoolExpr a, BoolExpr b);
  static BoolExpr implies(BoolExpr a, BoolExpr b);

  bool eval(const Assignment& a) const;
  Var max_var() const;
};

BoolExpr to_expr(const Formula& f);
BoolExpr to_expr(const Clause& disjunction);

// Definitional encoding with every gate fully defined, so the model count
// over the first `num_vars` variables equals the total model count.
// Gate variables are allocated from num_vars + 1 upward.
CnfFormula tseitin(const BoolExpr& root, std::uint32_t num_vars);

// phi_{k,m} = l_1 C_1 (l_2 C_2 (... l_m)), C_j = or iff connector j is set.
struct ChainFormula {
  std::uint64_t k = 1;
  std::uint32_t m = 1;
  std::vector<Lit> lits;          // size m
  std::vector<bool> disjunctive;  // size m - 1

  // Same shape with every literal and connector flipped.
  ChainFormula negated() const;
  BoolExpr tree() const;
  // At most m clauses (resp. cubes) of at most m literals.
  std::vector<Clause> cnf() const;
  std::vector<Clause> dnf() const;
};

// Realizes k over the fresh variables fresh_base .. fresh_base + m - 1.
// Connector j is bit j of the m-bit expansion of k, most significant first.
ChainFormula chain_formula(std::uint64_t k, std::uint32_t m, Var fresh_base);

class ReductionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ReductionMode { Conjunctive, Implicative, FormPreserving, ConstraintWeighted };

const char* to_string(ReductionMode m);

struct ReductionBlock {
  Var source = 0;  // weighted variable, or constraint index for ConstraintWeighted
  std::uint64_t k = 1;
  std::uint32_t m = 1;
  Var first_fresh = 0;
};

struct ReductionPlan {
  ReductionMode mode = ReductionMode::Conjunctive;
  std::uint32_t num_vars = 0;  // n of the source formula
  std::vector<ReductionBlock> blocks;
  std::uint32_t m_hat = 0;
  Rational c_f{1};
  Rational correction{0};  // W = c_f * count - correction
  std::uint32_t gate_vars = 0;
};

// `instance` is unweighted. Its sampling set is the n source variables
// plus all chain variables; gate variables, when present, lie outside it
// and are functionally determined.
struct Reduction {
  ProblemInstance instance;
  ReductionPlan plan;

  Rational weight_from_count(const BigInt& count) const { return plan.c_f * Rational(count) - plan.correction; }
};

// F and Omega = AND_i (x_i <-> phi_i). A CNF source yields F and Omega^CNF
// directly; a DNF source goes through the definitional encoding.
Reduction reduce_wmc_conjunctive(const ProblemInstance& inst);
// Omega -> F, with correction 2^n (1 - 2^-|N_F|). A DNF source yields a DNF.
Reduction reduce_wmc_implicative(const ProblemInstance& inst);
// CNF: F and Omega^CNF. DNF: (not Omega^CNF) or F, a DNF.
Reduction reduce_wmc_form_preserving(const ProblemInstance& inst);

struct WeightedConstraint {
  BoolExpr constraint;
  Rational weight;  // dyadic, in (0, 1)
};

// F and AND_i (G_i -> phi_i). An assignment weighs the product of the
// weights of the constraints it satisfies.
Reduction reduce_constraint_wmc(const Formula& f, const std::vector<WeightedConstraint>& groups);

}  // namespace cellcount
