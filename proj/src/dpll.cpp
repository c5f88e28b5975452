// SPDX-License-Identifier: MIT
#include "cellcount/dpll.hpp"

#include <algorithm>

#include "cellcount/gf2.hpp"

namespace cellcount {

Dpll::Dpll(std::uint32_t num_vars, std::vector<Var> projection) : n_(num_vars), projection_(std::move(projection)) {
  std::sort(projection_.begin(), projection_.end());
  projection_.erase(std::unique(projection_.begin(), projection_.end()), projection_.end());
  for (Var v : projection_) {
    if (v < 1 || v > n_) throw std::invalid_argument("projection variable out of range");
  }
}

void Dpll::add_clause(const Clause& c) {
  Clause d = c;
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (d[i].var() == d[i - 1].var()) return;  // tautology
  }
  for (Lit l : d) {
    if (l.var() < 1 || l.var() > n_) throw std::invalid_argument("clause literal out of range");
  }
  clauses_.push_back(std::move(d));
}

void Dpll::add_xor(const XorClause& x) {
  for (Var v : x.vars) {
    if (v < 1 || v > n_) throw std::invalid_argument("xor variable out of range");
  }
  raw_xors_.push_back(x);
}

void Dpll::add_formula(const CnfFormula& f) {
  for (const auto& c : f.clauses) add_clause(c);
  for (const auto& x : f.xors) add_xor(x);
}

void Dpll::attach(std::uint32_t ci) {
  const Clause& c = clauses_[ci];
  watches_[c[0].code()].push_back(ci);
  watches_[c[1].code()].push_back(ci);
}

bool Dpll::init() {
  value_.assign(n_ + 1, -1);
  var_level_.assign(n_ + 1, 0);
  watches_.assign(2 * (static_cast<std::size_t>(n_) + 1), {});
  var_rows_.assign(n_ + 1, {});

  std::vector<bool> in_proj(n_ + 1, false);
  for (Var v : projection_) in_proj[v] = true;
  order_ = projection_;
  for (Var v = 1; v <= n_; ++v)
    if (!in_proj[v]) order_.push_back(v);
  pos_.assign(n_ + 1, 0);
  for (std::size_t i = 0; i < order_.size(); ++i) pos_[order_[i]] = static_cast<std::uint32_t>(i);

  if (!raw_xors_.empty()) {
    Gf2System sys(n_);
    for (const auto& x : raw_xors_) {
      BitVec row(n_);
      for (Var v : x.vars) row.flip(v - 1);
      sys.add_row(std::move(row), x.parity);
    }
    std::vector<std::size_t> cols(order_.rbegin(), order_.rend());
    for (auto& c : cols) c -= 1;
    sys.eliminate(cols);
    if (sys.inconsistent()) return false;
    for (std::size_t r = 0; r < sys.rows(); ++r) {
      XorRow xr;
      for (std::size_t k = sys.row(r).next_set(0); k < n_; k = sys.row(r).next_set(k + 1))
        xr.vars.push_back(static_cast<Var>(k + 1));
      xr.rhs = sys.rhs(r);
      xr.unassigned = static_cast<std::uint32_t>(xr.vars.size());
      const auto idx = static_cast<std::uint32_t>(xrows_.size());
      for (Var v : xr.vars) var_rows_[v].push_back(idx);
      if (xr.vars.size() == 1) xq_.push_back(Lit(xr.vars[0], !xr.rhs));
      xrows_.push_back(std::move(xr));
    }
  }

  for (std::uint32_t ci = 0; ci < clauses_.size(); ++ci) {
    const Clause& c = clauses_[ci];
    if (c.empty()) return false;
    if (c.size() == 1) {
      xq_.push_back(c[0]);
    } else {
      attach(ci);
    }
  }
  return propagate();
}

void Dpll::assign(Lit l) {
  const Var v = l.var();
  const bool val = !l.negative();
  value_[v] = val ? 1 : 0;
  var_level_[v] = level();
  trail_.push_back(v);
  for (std::uint32_t r : var_rows_[v]) {
    XorRow& row = xrows_[r];
    --row.unassigned;
    row.parity = row.parity != val;
    if (row.unassigned == 0) {
      if (row.parity != row.rhs) xor_conflict_ = true;
    } else if (row.unassigned == 1) {
      for (Var u : row.vars) {
        if (value_[u] < 0) {
          xq_.push_back(Lit(u, row.rhs == row.parity));
          break;
        }
      }
    }
  }
}

void Dpll::unassign(Var v) {
  const bool val = value_[v] == 1;
  for (std::uint32_t r : var_rows_[v]) {
    XorRow& row = xrows_[r];
    ++row.unassigned;
    row.parity = row.parity != val;
  }
  value_[v] = -1;
  hint_ = std::min<std::size_t>(hint_, pos_[v]);
}

bool Dpll::propagate() {
  while (true) {
    if (xor_conflict_) return false;
    if (!xq_.empty()) {
      const Lit l = xq_.back();
      xq_.pop_back();
      const auto val = lit_value(l);
      if (val == 0) return false;
      if (val < 0) assign(l);
      continue;
    }
    if (qhead_ == trail_.size()) return true;
    const Var v = trail_[qhead_++];
    const Lit f(v, value_[v] == 1);  // the literal that just became false
    auto& ws = watches_[f.code()];
    std::size_t i = 0, j = 0;
    bool conflict = false;
    while (i < ws.size()) {
      const std::uint32_t ci = ws[i++];
      Clause& c = clauses_[ci];
      if (c[0] == f) std::swap(c[0], c[1]);
      if (lit_value(c[0]) == 1) {
        ws[j++] = ci;
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.size(); ++k) {
        if (lit_value(c[k]) != 0) {
          std::swap(c[1], c[k]);
          watches_[c[1].code()].push_back(ci);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = ci;
      if (lit_value(c[0]) == 0) {
        conflict = true;
        while (i < ws.size()) ws[j++] = ws[i++];
        break;
      }
      assign(c[0]);
    }
    ws.resize(j);
    if (conflict) return false;
  }
}

void Dpll::undo_to(std::uint32_t lvl) {
  if (level() <= lvl) return;
  const std::size_t target = trail_lim_[lvl];
  while (trail_.size() > target) {
    const Var v = trail_.back();
    trail_.pop_back();
    unassign(v);
  }
  trail_lim_.resize(lvl);
  flipped_.resize(lvl);
  qhead_ = trail_.size();
  xq_.clear();
  xor_conflict_ = false;
}

bool Dpll::backtrack() {
  std::uint32_t L = level();
  while (L > 0 && flipped_[L - 1]) --L;
  if (L == 0) return false;
  const Var d = trail_[trail_lim_[L - 1]];
  const bool dv = value_[d] == 1;
  undo_to(L - 1);
  trail_lim_.push_back(trail_.size());
  flipped_.push_back(true);
  assign(Lit(d, dv));
  return true;
}

Var Dpll::next_decision() {
  while (hint_ < order_.size() && value_[order_[hint_]] >= 0) ++hint_;
  return hint_ < order_.size() ? order_[hint_] : 0;
}

void Dpll::enumerate(const std::function<bool(const Assignment&)>& on_model) {
  if (used_) throw std::logic_error("Dpll::enumerate is single use");
  used_ = true;
  if (!init()) return;
  const std::size_t nproj = projection_.size();
  while (true) {
    if (!propagate()) {
      ++conflicts_;
      if (!backtrack()) return;
      continue;
    }
    const Var v = next_decision();
    if (v == 0) {
      Assignment a(static_cast<std::size_t>(n_) + 1);
      for (Var u = 1; u <= n_; ++u) a.set(u, value_[u] == 1);
      if (!on_model(a)) return;
      // Deepest decision on a projection variable that still has an open branch.
      std::uint32_t L = level();
      while (L > 0 && (flipped_[L - 1] || pos_[trail_[trail_lim_[L - 1]]] >= nproj)) --L;
      if (L == 0) return;
      Clause block;
      block.reserve(nproj);
      for (Var s : projection_) block.push_back(Lit(s, value_[s] == 1));
      const Var d = trail_[trail_lim_[L - 1]];
      const bool dv = value_[d] == 1;
      undo_to(L - 1);
      if (block.size() == 1) {
        assign(Lit(d, dv));
        continue;
      }
      auto di = std::find(block.begin(), block.end(), Lit(d, dv));
      std::iter_swap(block.begin(), di);
      std::size_t best = 1;
      for (std::size_t k = 1; k < block.size(); ++k) {
        const auto val = lit_value(block[k]);
        if (val < 0) {
          best = k;
          break;
        }
        if (var_level_[block[k].var()] > var_level_[block[best].var()]) best = k;
      }
      std::swap(block[1], block[best]);
      clauses_.push_back(std::move(block));
      attach(static_cast<std::uint32_t>(clauses_.size() - 1));
      trail_lim_.push_back(trail_.size());
      flipped_.push_back(true);
      assign(Lit(d, dv));
      continue;
    }
    ++decisions_;
    if (budget_ != 0 && decisions_ > budget_) throw BudgetExceeded("builtin solver decision budget exceeded");
    trail_lim_.push_back(trail_.size());
    flipped_.push_back(false);
    assign(Lit(v, true));
  }
}

std::optional<Assignment> Dpll::solve_one() {
  std::optional<Assignment> out;
  enumerate([&](const Assignment& a) {
    out = a;
    return false;
  });
  return out;
}

}  // namespace cellcount
