// SPDX-License-Identifier: MIT
#include "cellcount/indsupport.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "cellcount/rng.hpp"

namespace cellcount {

namespace {

Lit shift(Lit l, std::uint32_t by) { return Lit(l.var() + by, l.negative()); }

void append_copy(CnfFormula& out, const CnfFormula& f, std::uint32_t by) {
  for (const auto& c : f.clauses) {
    Clause d;
    d.reserve(c.size());
    for (Lit l : c) d.push_back(shift(l, by));
    out.clauses.push_back(std::move(d));
  }
  for (const auto& x : f.xors) {
    XorClause y = x;
    for (Var& v : y.vars) v += by;
    out.xors.push_back(std::move(y));
  }
}

std::vector<Clause> equality(Var v, std::uint32_t n) {
  return {{Lit(v, true), Lit(n + v, false)}, {Lit(v, false), Lit(n + v, true)}};
}

void check_vars(const std::vector<Var>& s, std::uint32_t n) {
  for (Var v : s)
    if (v < 1 || v > n) throw std::invalid_argument("variable " + std::to_string(v) + " is outside the formula");
}

std::vector<Var> sorted_unique(std::vector<Var> s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

std::optional<Assignment> find_model(const CnfFormula& f, Oracle& oracle) {
  const Formula formula = f;
  OracleQuery q;
  q.formula = &formula;
  if (f.num_vars > 0) q.sampling = {1};
  q.limit = 1;
  SolutionSet r = oracle.bounded_sat(q);
  if (r.empty()) return std::nullopt;
  return std::move(r.solutions.front().model);
}

Assignment copy_at(const Assignment& m, std::uint32_t n, std::uint32_t offset) {
  Assignment a = make_assignment(n);
  for (Var v = 1; v <= n; ++v) a.set(v, m.get(offset + v));
  return a;
}

}  // namespace

CnfFormula build_q_formula(const CnfFormula& f, const std::vector<Var>& s,
                           const std::optional<std::vector<Var>>& universe) {
  const std::uint32_t n = f.num_vars;
  check_vars(s, n);
  const std::vector<Var> all = universe ? sorted_unique(*universe) : all_vars(n);
  check_vars(all, n);
  CnfFormula q;
  q.num_vars = 3 * n;
  append_copy(q, f, 0);
  append_copy(q, f, n);
  for (Var v : sorted_unique(s))
    for (auto& c : equality(v, n)) q.clauses.push_back(std::move(c));
  Clause some_differs;
  for (Var v : all) {
    const Var b = 2 * n + v;
    q.clauses.push_back({Lit(v, true), Lit(n + v, true), Lit(b, false)});
    q.clauses.push_back({Lit(v, false), Lit(n + v, false), Lit(b, false)});
    some_differs.push_back(Lit(b, true));
  }
  q.clauses.push_back(std::move(some_differs));
  return q;
}

std::optional<std::pair<Assignment, Assignment>> support_counterexample(const CnfFormula& f,
                                                                        const std::vector<Var>& s, Oracle& oracle) {
  const auto m = find_model(build_q_formula(f, s), oracle);
  if (!m) return std::nullopt;
  return std::make_pair(copy_at(*m, f.num_vars, 0), copy_at(*m, f.num_vars, f.num_vars));
}

bool is_independent_support(const CnfFormula& f, const std::vector<Var>& s, Oracle& oracle) {
  return !support_counterexample(f, s, oracle).has_value();
}

std::vector<Var> find_local_dependencies(const CnfFormula& f, const std::vector<Var>& v, Oracle& oracle) {
  check_vars(v, f.num_vars);
  std::vector<bool> alive(f.clauses.size(), true);
  std::vector<std::vector<std::size_t>> occurs(f.num_vars + 1);
  for (std::size_t k = 0; k < f.clauses.size(); ++k)
    for (Lit l : f.clauses[k]) occurs[l.var()].push_back(k);

  std::vector<Var> z;
  for (Var x : sorted_unique(v)) {
    std::vector<std::size_t> g;
    for (std::size_t k : occurs[x])
      if (alive[k] && (g.empty() || g.back() != k)) g.push_back(k);
    if (g.empty()) continue;
    // Compact renumbering of Vars(G), x first.
    std::map<Var, Var> index{{x, 1}};
    for (std::size_t k : g)
      for (Lit l : f.clauses[k]) index.try_emplace(l.var(), 0);
    Var next = 2;
    for (auto& [var, id] : index)
      if (var != x) id = next++;
    CnfFormula local;
    local.num_vars = static_cast<std::uint32_t>(index.size());
    for (std::size_t k : g) {
      Clause c;
      for (Lit l : f.clauses[k]) c.push_back(Lit(index[l.var()], l.negative()));
      local.clauses.push_back(std::move(c));
    }
    std::vector<Var> others(local.num_vars - 1);
    std::iota(others.begin(), others.end(), 2);
    if (!find_model(build_q_formula(local, others), oracle)) {
      z.push_back(x);
      for (std::size_t k : g) alive[k] = false;
    }
  }
  return z;
}

GmusInstance translate_to_gmus(const CnfFormula& f, const std::vector<Var>& u, const std::vector<Var>& v,
                               Oracle& oracle) {
  const std::vector<Var> us = sorted_unique(u), vs = sorted_unique(v);
  check_vars(vs, f.num_vars);
  if (!std::includes(vs.begin(), vs.end(), us.begin(), us.end()))
    throw std::invalid_argument("U must be a subset of V");
  if (auto cex = support_counterexample(f, vs, oracle)) throw NotASupport(cex->first, cex->second);
  GmusInstance gi;
  gi.omega = build_q_formula(f, us);
  for (Var x : vs) {
    if (std::binary_search(us.begin(), us.end(), x)) continue;
    gi.group_vars.push_back(x);
    gi.groups.push_back(equality(x, f.num_vars));
  }
  return gi;
}

GmusResult gmus_deletion(const GmusInstance& gi, const std::vector<std::size_t>& order, Oracle& oracle,
                         std::uint64_t budget) {
  const std::size_t k = gi.groups.size();
  if (order.size() != k) throw std::invalid_argument("deletion order must list every group once");
  std::vector<bool> keep(k, true);
  GmusResult res;
  for (std::size_t pos = 0; pos < k; ++pos) {
    if (budget != 0 && res.sat_calls >= budget) {
      res.minimal = false;
      break;
    }
    const std::size_t cand = order[pos];
    keep.at(cand) = false;
    CnfFormula trial = gi.omega;
    for (std::size_t j = 0; j < k; ++j)
      if (keep[j])
        for (const auto& c : gi.groups[j]) trial.clauses.push_back(c);
    ++res.sat_calls;
    if (find_model(trial, oracle)) keep[cand] = true;
  }
  for (std::size_t j = 0; j < k; ++j)
    if (keep[j]) res.kept.push_back(j);
  return res;
}

namespace {

SupportSets minimize(const CnfFormula& f, const std::vector<Var>& u, const std::vector<Var>& v,
                     const MisOptions& opts, Oracle& oracle) {
  SupportSets out;
  out.u = u;
  out.v = v;
  std::vector<Var> over = v;
  if (opts.local_deps) {
    out.z = find_local_dependencies(f, v, oracle);
    std::vector<Var> pruned;
    std::set_difference(v.begin(), v.end(), out.z.begin(), out.z.end(), std::back_inserter(pruned));
    pruned.insert(pruned.end(), u.begin(), u.end());
    pruned = sorted_unique(std::move(pruned));
    // Clause removal makes V \ Z sound only relative to all variables;
    // inside a smaller V it can lose the support property.
    if (pruned.size() != v.size() && !is_independent_support(f, pruned, oracle)) {
      out.pruning_dropped = true;
    } else {
      over = std::move(pruned);
    }
  }
  const GmusInstance gi = translate_to_gmus(f, u, over, oracle);
  std::vector<std::size_t> order(gi.groups.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(opts.seed);
  std::shuffle(order.begin(), order.end(), rng.engine());
  const GmusResult g = gmus_deletion(gi, order, oracle, opts.budget);
  out.minimal = g.minimal;
  out.sat_calls = g.sat_calls;
  out.result = u;
  for (std::size_t j : g.kept) out.result.push_back(gi.group_vars[j]);
  out.result = sorted_unique(out.result);
  return out;
}

}  // namespace

SupportSets mis(const CnfFormula& f, const std::vector<Var>& u, const std::optional<std::vector<Var>>& v,
                const MisOptions& opts, Oracle& oracle) {
  const std::vector<Var> us = sorted_unique(u);
  const std::vector<Var> vs = v ? sorted_unique(*v) : all_vars(f.num_vars);
  check_vars(vs, f.num_vars);
  if (!std::includes(vs.begin(), vs.end(), us.begin(), us.end()))
    throw std::invalid_argument("U must be a subset of V");
  if (!opts.repair || is_independent_support(f, vs, oracle)) return minimize(f, us, vs, opts, oracle);

  // Grow V into a support with V kept as the must-include set, then
  // minimize inside the grown set.
  MisOptions grow = opts;
  grow.seed = Rng::derive(opts.seed, 1);
  const SupportSets first = minimize(f, vs, all_vars(f.num_vars), grow, oracle);
  SupportSets out = minimize(f, us, first.result, opts, oracle);
  out.v = vs;
  out.repaired = true;
  out.sat_calls += first.sat_calls;
  out.minimal = out.minimal && first.minimal;
  return out;
}

}  // namespace cellcount
