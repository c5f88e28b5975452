// SPDX-License-Identifier: MIT
#include "cellcount/chain.hpp"

#include <algorithm>
#include <string>

namespace cellcount {

BoolExpr BoolExpr::constant(bool v) {
  BoolExpr e;
  e.kind = Kind::Const;
  e.value = v;
  return e;
}

BoolExpr BoolExpr::literal(cellcount::Lit l) {
  BoolExpr e;
  e.kind = Kind::Lit;
  e.lit = l;
  return e;
}

BoolExpr BoolExpr::conj(std::vector<BoolExpr> kids) {
  BoolExpr e;
  e.kind = Kind::And;
  e.kids = std::move(kids);
  return e;
}

BoolExpr BoolExpr::disj(std::vector<BoolExpr> kids) {
  BoolExpr e;
  e.kind = Kind::Or;
  e.kids = std::move(kids);
  return e;
}

BoolExpr BoolExpr::negation(BoolExpr inner) {
  BoolExpr e;
  e.kind = Kind::Not;
  e.kids.push_back(std::move(inner));
  return e;
}

BoolExpr BoolExpr::exclusive(std::vector<BoolExpr> kids) {
  BoolExpr e;
  e.kind = Kind::Xor;
  e.kids = std::move(kids);
  return e;
}

BoolExpr BoolExpr::iff(BoolExpr a, BoolExpr b) {
  return conj({disj({negation(a), b}), disj({a, negation(b)})});
}

BoolExpr BoolExpr::implies(BoolExpr a, BoolExpr b) { return disj({negation(std::move(a)), std::move(b)}); }

bool BoolExpr::eval(const Assignment& a) const {
  switch (kind) {
    case Kind::Const:
      return value;
    case Kind::Lit:
      return lit.holds(a.get(lit.var()));
    case Kind::Not:
      return !kids[0].eval(a);
    case Kind::And:
      return std::all_of(kids.begin(), kids.end(), [&](const BoolExpr& k) { return k.eval(a); });
    case Kind::Or:
      return std::any_of(kids.begin(), kids.end(), [&](const BoolExpr& k) { return k.eval(a); });
    case Kind::Xor: {
      bool p = false;
      for (const auto& k : kids) p ^= k.eval(a);
      return p;
    }
  }
  return false;
}

Var BoolExpr::max_var() const {
  Var v = kind == Kind::Lit ? lit.var() : 0;
  for (const auto& k : kids) v = std::max(v, k.max_var());
  return v;
}

BoolExpr to_expr(const Clause& disjunction) {
  std::vector<BoolExpr> kids;
  for (Lit l : disjunction) kids.push_back(BoolExpr::literal(l));
  return BoolExpr::disj(std::move(kids));
}

namespace {

BoolExpr cube_expr(const Clause& cube) {
  std::vector<BoolExpr> kids;
  for (Lit l : cube) kids.push_back(BoolExpr::literal(l));
  return BoolExpr::conj(std::move(kids));
}

BoolExpr xor_expr(const XorClause& x) {
  std::vector<BoolExpr> kids;
  for (Var v : x.vars) kids.push_back(BoolExpr::literal(Lit(v, false)));
  BoolExpr e = BoolExpr::exclusive(std::move(kids));
  return x.parity ? e : BoolExpr::negation(std::move(e));
}

}  // namespace

BoolExpr to_expr(const Formula& f) {
  std::vector<BoolExpr> kids;
  if (const auto* c = std::get_if<CnfFormula>(&f)) {
    for (const auto& cl : c->clauses) kids.push_back(to_expr(cl));
    for (const auto& x : c->xors) kids.push_back(xor_expr(x));
    return BoolExpr::conj(std::move(kids));
  }
  for (const auto& cube : std::get<DnfFormula>(f).cubes) kids.push_back(cube_expr(cube));
  return BoolExpr::disj(std::move(kids));
}

namespace {

class Encoder {
 public:
  explicit Encoder(std::uint32_t n) : next_(n + 1) { out_.num_vars = n; }

  void assert_expr(const BoolExpr& e) {
    using K = BoolExpr::Kind;
    switch (e.kind) {
      case K::And:
        for (const auto& k : e.kids) assert_expr(k);
        return;
      case K::Or: {
        Clause c;
        for (const auto& k : e.kids) c.push_back(encode(k));
        out_.clauses.push_back(std::move(c));
        return;
      }
      case K::Const:
        if (!e.value) out_.clauses.push_back({});
        return;
      default:
        out_.clauses.push_back({encode(e)});
    }
  }

  CnfFormula finish() {
    out_.num_vars = next_ - 1;
    return std::move(out_);
  }

 private:
  Lit fresh() { return Lit(next_++, false); }

  Lit constant(bool v) {
    if (!const_true_) {
      const_true_ = fresh();
      out_.clauses.push_back({*const_true_});
    }
    return v ? *const_true_ : ~*const_true_;
  }

  Lit encode(const BoolExpr& e) {
    using K = BoolExpr::Kind;
    switch (e.kind) {
      case K::Const:
        return constant(e.value);
      case K::Lit:
        return e.lit;
      case K::Not:
        return ~encode(e.kids[0]);
      case K::And:
      case K::Or: {
        const bool is_and = e.kind == K::And;
        if (e.kids.empty()) return constant(is_and);
        std::vector<Lit> ls;
        for (const auto& k : e.kids) ls.push_back(encode(k));
        if (ls.size() == 1) return ls[0];
        // An or-gate is the and-gate of the negated inputs, negated.
        const Lit g = fresh();
        const Lit ga = is_and ? g : ~g;
        Clause big{ga};
        for (Lit l : ls) {
          const Lit li = is_and ? l : ~l;
          out_.clauses.push_back({~ga, li});
          big.push_back(~li);
        }
        out_.clauses.push_back(std::move(big));
        return g;
      }
      case K::Xor: {
        if (e.kids.empty()) return constant(false);
        Lit acc = encode(e.kids[0]);
        for (std::size_t i = 1; i < e.kids.size(); ++i) {
          const Lit b = encode(e.kids[i]);
          const Lit g = fresh();
          out_.clauses.push_back({~g, acc, b});
          out_.clauses.push_back({~g, ~acc, ~b});
          out_.clauses.push_back({g, ~acc, b});
          out_.clauses.push_back({g, acc, ~b});
          acc = g;
        }
        return acc;
      }
    }
    return constant(false);
  }

  CnfFormula out_;
  Var next_;
  std::optional<Lit> const_true_;
};

}  // namespace

CnfFormula tseitin(const BoolExpr& root, std::uint32_t num_vars) {
  if (root.max_var() > num_vars) throw std::invalid_argument("expression mentions a variable beyond num_vars");
  Encoder enc(num_vars);
  enc.assert_expr(root);
  return enc.finish();
}

ChainFormula ChainFormula::negated() const {
  ChainFormula n = *this;
  n.k = (std::uint64_t{1} << m) - k;
  for (auto& l : n.lits) l = ~l;
  for (std::size_t j = 0; j < n.disjunctive.size(); ++j) n.disjunctive[j] = !disjunctive[j];
  return n;
}

BoolExpr ChainFormula::tree() const {
  BoolExpr e = BoolExpr::literal(lits[m - 1]);
  for (std::uint32_t j = m - 1; j-- > 0;) {
    std::vector<BoolExpr> kids{BoolExpr::literal(lits[j]), std::move(e)};
    e = disjunctive[j] ? BoolExpr::disj(std::move(kids)) : BoolExpr::conj(std::move(kids));
  }
  return e;
}

namespace {

// Shared inductive construction. For CNF the distributing connector is
// "or"; for DNF it is "and". Items come out with the outermost literal first.
std::vector<Clause> normal_form(const ChainFormula& c, bool cnf) {
  std::vector<Clause> items{{c.lits[c.m - 1]}};
  for (std::uint32_t j = c.m - 1; j-- > 0;) {
    if (c.disjunctive[j] == cnf) {
      for (auto& it : items) it.insert(it.begin(), c.lits[j]);
    } else {
      items.insert(items.begin(), Clause{c.lits[j]});
    }
  }
  return items;
}

}  // namespace

std::vector<Clause> ChainFormula::cnf() const { return normal_form(*this, true); }
std::vector<Clause> ChainFormula::dnf() const { return normal_form(*this, false); }

ChainFormula chain_formula(std::uint64_t k, std::uint32_t m, Var fresh_base) {
  if (m < 1 || m > 63) throw std::invalid_argument("chain width must lie in [1, 63]");
  if (k % 2 == 0 || k >= (std::uint64_t{1} << m))
    throw std::invalid_argument("chain count must be odd and below 2^m");
  if (fresh_base < 1) throw std::invalid_argument("variables start at 1");
  ChainFormula c;
  c.k = k;
  c.m = m;
  for (std::uint32_t j = 0; j < m; ++j) c.lits.push_back(Lit(fresh_base + j, false));
  for (std::uint32_t j = 0; j + 1 < m; ++j) c.disjunctive.push_back(((k >> (m - 1 - j)) & 1U) != 0);
  return c;
}

const char* to_string(ReductionMode m) {
  switch (m) {
    case ReductionMode::Conjunctive:
      return "conjunctive";
    case ReductionMode::Implicative:
      return "implicative";
    case ReductionMode::FormPreserving:
      return "form-preserving";
    case ReductionMode::ConstraintWeighted:
      return "constraint";
  }
  return "?";
}

namespace {

struct Prepared {
  ReductionPlan plan;
  std::vector<ChainFormula> chains;
};

Prepared prepare(const ProblemInstance& inst, ReductionMode mode) {
  Prepared p;
  p.plan.mode = mode;
  p.plan.num_vars = num_vars(inst.formula);
  Var next = p.plan.num_vars + 1;
  for (const auto& [v, w] : inst.weights.entries()) {
    if (!w.dyadic)
      throw ReductionError("weight of variable " + std::to_string(v) + " is not of the form k/2^m with m <= " +
                           std::to_string(kMaxDyadicBits));
    if (v > p.plan.num_vars) throw ReductionError("weighted variable " + std::to_string(v) + " is out of range");
    p.plan.blocks.push_back({v, w.dyadic->k, w.dyadic->m, next});
    p.chains.push_back(chain_formula(w.dyadic->k, w.dyadic->m, next));
    next += w.dyadic->m;
    p.plan.m_hat += w.dyadic->m;
  }
  p.plan.c_f = Rational(1);
  mpz_mul_2exp(p.plan.c_f.get_den_mpz_t(), p.plan.c_f.get_den_mpz_t(), p.plan.m_hat);
  return p;
}

std::uint32_t total_vars(const ReductionPlan& plan) { return plan.num_vars + plan.m_hat; }

// (-x or phi^CNF) and (x or (not phi)^CNF), distributed.
std::vector<Clause> omega_cnf(const Prepared& p) {
  std::vector<Clause> out;
  for (std::size_t i = 0; i < p.chains.size(); ++i) {
    const Lit x(p.plan.blocks[i].source, false);
    for (Clause c : p.chains[i].cnf()) {
      c.insert(c.begin(), ~x);
      out.push_back(std::move(c));
    }
    for (Clause c : p.chains[i].negated().cnf()) {
      c.insert(c.begin(), x);
      out.push_back(std::move(c));
    }
  }
  return out;
}

BoolExpr omega_expr(const Prepared& p) {
  std::vector<BoolExpr> kids;
  for (std::size_t i = 0; i < p.chains.size(); ++i)
    kids.push_back(BoolExpr::iff(BoolExpr::literal(Lit(p.plan.blocks[i].source, false)), p.chains[i].tree()));
  return BoolExpr::conj(std::move(kids));
}

Rational implicative_correction(const ReductionPlan& plan) {
  // 2^n (1 - 2^-|N_F|) = 2^n - 2^(n - |N_F|)
  BigInt a = 1, b = 1;
  a <<= plan.num_vars;
  b <<= plan.num_vars - static_cast<std::uint32_t>(plan.blocks.size());
  return Rational(a - b);
}

Reduction finish(Prepared p, Formula out) {
  Reduction r;
  const std::uint32_t base = total_vars(p.plan);
  p.plan.gate_vars = num_vars(out) - base;
  r.instance = make_instance(std::move(out));
  r.instance.sampling = all_vars(base);
  r.plan = std::move(p.plan);
  return r;
}

Reduction encode_expr(Prepared p, const BoolExpr& e) {
  const std::uint32_t base = total_vars(p.plan);
  return finish(std::move(p), tseitin(e, base));
}

Reduction cnf_with_omega(Prepared p, const CnfFormula& f) {
  CnfFormula out = f;
  out.num_vars = total_vars(p.plan);
  for (auto& c : omega_cnf(p)) out.clauses.push_back(std::move(c));
  return finish(std::move(p), std::move(out));
}

Reduction dnf_or_not_omega(Prepared p, const DnfFormula& f) {
  DnfFormula out = f;
  out.num_vars = total_vars(p.plan);
  for (const Clause& c : omega_cnf(p)) {
    Clause cube;
    for (Lit l : c) cube.push_back(~l);
    out.cubes.push_back(std::move(cube));
  }
  p.plan.correction = implicative_correction(p.plan);
  return finish(std::move(p), std::move(out));
}

}  // namespace

Reduction reduce_wmc_conjunctive(const ProblemInstance& inst) {
  Prepared p = prepare(inst, ReductionMode::Conjunctive);
  if (const auto* c = std::get_if<CnfFormula>(&inst.formula)) return cnf_with_omega(std::move(p), *c);
  const BoolExpr e = BoolExpr::conj({to_expr(inst.formula), omega_expr(p)});
  return encode_expr(std::move(p), e);
}

Reduction reduce_wmc_implicative(const ProblemInstance& inst) {
  Prepared p = prepare(inst, ReductionMode::Implicative);
  if (const auto* d = std::get_if<DnfFormula>(&inst.formula)) return dnf_or_not_omega(std::move(p), *d);
  p.plan.correction = implicative_correction(p.plan);
  const BoolExpr e = BoolExpr::implies(omega_expr(p), to_expr(inst.formula));
  return encode_expr(std::move(p), e);
}

Reduction reduce_wmc_form_preserving(const ProblemInstance& inst) {
  Prepared p = prepare(inst, ReductionMode::FormPreserving);
  if (const auto* c = std::get_if<CnfFormula>(&inst.formula)) {
    if (!c->xors.empty()) throw ReductionError("form-preserving reduction needs a pure CNF (no XOR lines)");
    return cnf_with_omega(std::move(p), *c);
  }
  return dnf_or_not_omega(std::move(p), std::get<DnfFormula>(inst.formula));
}

Reduction reduce_constraint_wmc(const Formula& f, const std::vector<WeightedConstraint>& groups) {
  Prepared p;
  p.plan.mode = ReductionMode::ConstraintWeighted;
  p.plan.num_vars = num_vars(f);
  Var next = p.plan.num_vars + 1;
  std::vector<BoolExpr> kids{to_expr(f)};
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto d = dyadic_form(groups[i].weight);
    if (!d) throw ReductionError("constraint " + std::to_string(i + 1) + " has a non-dyadic weight");
    if (groups[i].constraint.max_var() > p.plan.num_vars)
      throw ReductionError("constraint " + std::to_string(i + 1) + " mentions an unknown variable");
    p.plan.blocks.push_back({static_cast<Var>(i + 1), d->k, d->m, next});
    const ChainFormula c = chain_formula(d->k, d->m, next);
    kids.push_back(BoolExpr::implies(groups[i].constraint, c.tree()));
    p.chains.push_back(c);
    next += d->m;
    p.plan.m_hat += d->m;
  }
  p.plan.c_f = Rational(1);
  mpz_mul_2exp(p.plan.c_f.get_den_mpz_t(), p.plan.c_f.get_den_mpz_t(), p.plan.m_hat);
  return encode_expr(std::move(p), BoolExpr::conj(std::move(kids)));
}

}  // namespace cellcount
