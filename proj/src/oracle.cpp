// SPDX-License-Identifier: MIT
#include "cellcount/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <unordered_set>

#include "cellcount/dpll.hpp"
#include "cellcount/gf2.hpp"

namespace cellcount {

OracleQuery make_query(const ProblemInstance& p, std::size_t limit) {
  OracleQuery q;
  q.formula = &p.formula;
  q.sampling = p.sampling;
  q.limit = limit;
  q.weights = p.weights.empty() ? nullptr : &p.weights;
  return q;
}

void SolutionSet::add(Solution s) {
  if (solutions.empty() || s.weight < min_weight_seen) min_weight_seen = s.weight;
  total_weight += s.weight;
  solutions.push_back(std::move(s));
}

namespace {

Solution make_solution(const Assignment& a, const OracleQuery& q) {
  Solution s;
  s.projection = project(a, q.sampling);
  s.model = a;
  s.weight = q.weights ? assignment_weight(*q.weights, a) : Rational(1);
  return s;
}

bool has_contradiction(const std::vector<XorClause>& xs) {
  return std::any_of(xs.begin(), xs.end(), [](const XorClause& x) { return x.is_contradiction(); });
}

}  // namespace

SolutionSet BuiltinOracle::bounded_sat(const OracleQuery& q) {
  if (q.formula == nullptr || q.limit < 1) throw std::invalid_argument("malformed oracle query");
  if (is_dnf(*q.formula)) return dnf_bounded_sat(q, &stats_);
  ++stats_.queries;
  ++stats_.solver_invocations;
  SolutionSet out;
  if (has_contradiction(q.extra_xors)) {
    ++stats_.sat_calls;
    return out;
  }
  const auto& f = std::get<CnfFormula>(*q.formula);
  Dpll d(f.num_vars, q.sampling);
  d.add_formula(f);
  for (const auto& x : q.extra_xors) d.add_xor(x);
  d.set_decision_budget(budget_);
  try {
    d.enumerate([&](const Assignment& a) {
      ++stats_.sat_calls;
      out.add(make_solution(a, q));
      if (q.stop && q.stop(out.solutions.back())) {
        out.stopped = true;
        return false;
      }
      return out.size() < q.limit;
    });
  } catch (const BudgetExceeded& e) {
    stats_.decisions += d.decisions();
    throw OracleError(e.what());
  }
  if (!out.stopped && out.size() < q.limit) ++stats_.sat_calls;
  stats_.decisions += d.decisions();
  return out;
}

SolutionSet DnfOracle::bounded_sat(const OracleQuery& q) {
  if (q.formula == nullptr || !is_dnf(*q.formula)) throw std::invalid_argument("DNF oracle requires a DNF formula");
  return dnf_bounded_sat(q, &stats_);
}

SolutionSet dnf_bounded_sat(const OracleQuery& q, OracleStats* stats) {
  if (q.formula == nullptr || q.limit < 1) throw std::invalid_argument("malformed oracle query");
  const auto& f = std::get<DnfFormula>(*q.formula);
  if (stats) ++stats->queries;
  SolutionSet out;
  if (has_contradiction(q.extra_xors)) return out;
  const std::uint32_t n = f.num_vars;
  std::vector<bool> in_s(n + 1, false);
  for (Var v : q.sampling) in_s[v] = true;
  // Existential columns first: rows pivoted on them never constrain S.
  std::vector<std::size_t> order;
  for (Var v = 1; v <= n; ++v)
    if (!in_s[v]) order.push_back(v - 1);
  for (Var v : q.sampling) order.push_back(v - 1);

  std::unordered_set<BitVec, BitVecHash> seen;
  for (const Clause& cube : f.cubes) {
    Gf2System sys(n);
    for (const auto& x : q.extra_xors) {
      BitVec row(n);
      for (Var v : x.vars) row.flip(v - 1);
      sys.add_row(std::move(row), x.parity);
    }
    for (Lit l : cube) {
      BitVec row(n);
      row.set(l.var() - 1, true);
      sys.add_row(std::move(row), !l.negative());
    }
    sys.eliminate(order);
    if (sys.inconsistent()) continue;

    // Free sampling columns and the rows each one toggles.
    std::vector<std::size_t> free_cols;
    for (Var v : q.sampling)
      if (!sys.is_pivot_column(v - 1)) free_cols.push_back(v - 1);
    std::vector<std::vector<std::size_t>> toggles(free_cols.size());
    for (std::size_t j = 0; j < free_cols.size(); ++j)
      for (std::size_t r = 0; r < sys.rows(); ++r)
        if (sys.row(r).get(free_cols[j])) toggles[j].push_back(r);

    BitVec x(n);  // column-indexed values; free columns start at 0
    for (std::size_t r = 0; r < sys.rows(); ++r)
      if (in_s[sys.pivot(r) + 1]) x.set(sys.pivot(r), sys.rhs(r));

    const std::size_t k = free_cols.size();
    for (std::uint64_t t = 0;; ++t) {
      if (t > 0) {
        if (k < 64 && t >= (std::uint64_t{1} << k)) break;
        const auto j = static_cast<std::size_t>(std::countr_zero(t));
        x.flip(free_cols[j]);
        for (std::size_t r : toggles[j])
          if (in_s[sys.pivot(r) + 1]) x.flip(sys.pivot(r));
      }
      Assignment a(static_cast<std::size_t>(n) + 1);
      for (Var v : q.sampling) a.set(v, x.get(v - 1));
      for (std::size_t r = 0; r < sys.rows(); ++r) {
        const std::size_t p = sys.pivot(r);
        if (in_s[p + 1]) continue;
        // Existential pivot: its row mentions only itself, free
        // existential columns held at 0, and sampling columns; x is zero
        // outside the sampling columns.
        a.set(p + 1, sys.rhs(r) != sys.row(r).and_parity(x));
      }
      Solution s = make_solution(a, q);
      if (!seen.insert(s.projection).second) {
        if (k == 0) break;
        continue;
      }
      out.add(std::move(s));
      if (stats) ++stats->sat_calls;
      if (q.stop && q.stop(out.solutions.back())) {
        out.stopped = true;
        return out;
      }
      if (out.size() >= q.limit) return out;
      if (k == 0) break;
    }
  }
  return out;
}

std::optional<Assignment> builtin_solve(const CnfFormula& f, const std::vector<XorClause>& extra,
                                        std::uint64_t decision_budget, std::uint64_t* decisions) {
  if (has_contradiction(extra)) return std::nullopt;
  Dpll d(f.num_vars, {});
  d.add_formula(f);
  for (const auto& x : extra) d.add_xor(x);
  d.set_decision_budget(decision_budget);
  auto r = d.solve_one();
  if (decisions) *decisions += d.decisions();
  return r;
}

std::vector<Clause> blast_xor_to_cnf(const XorClause& x, Var& next_fresh, std::size_t chunk_size) {
  if (chunk_size < 2) throw std::invalid_argument("chunk size must be at least 2");
  std::vector<Clause> out;
  auto direct = [&](const std::vector<Var>& vs, bool parity) {
    const std::size_t k = vs.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
      if ((std::popcount(mask) & 1) == static_cast<int>(parity)) continue;
      Clause c;
      for (std::size_t i = 0; i < k; ++i) c.push_back(Lit(vs[i], (mask >> i) & 1U));
      out.push_back(std::move(c));
    }
  };
  std::vector<Var> rest = x.vars;
  while (rest.size() > chunk_size) {
    std::vector<Var> head(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(chunk_size - 1));
    const Var t = next_fresh++;
    head.push_back(t);
    direct(head, false);
    std::vector<Var> next{t};
    next.insert(next.end(), rest.begin() + static_cast<std::ptrdiff_t>(chunk_size - 1), rest.end());
    rest = std::move(next);
  }
  direct(rest, x.parity);
  return out;
}

std::unique_ptr<Oracle> make_default_oracle() {
  const char* env = std::getenv("CELLCOUNT_SOLVER");
  if (env != nullptr) {
    if (auto cmd = parse_solver_spec(env)) return std::make_unique<ExternalOracle>(*cmd);
  }
  return std::make_unique<BuiltinOracle>();
}

}  // namespace cellcount
