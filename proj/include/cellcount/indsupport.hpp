// SPDX-License-Identifier: MIT
//
// Minimal independent supports through group-oriented unsatisfiable
// subsets of the two-copy formula Q_{F,S}.
//
// Variable layout of every Q-style formula over F with n variables:
// x_i = i, y_i = n + i, b_i = 2n + i.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cellcount/formula.hpp"
#include "cellcount/oracle.hpp"

namespace cellcount {

// F(x) and F(y), x_i = y_i for i in S, and some x_j != y_j for j in
// `universe` (default: every variable of F).
CnfFormula build_q_formula(const CnfFormula& f, const std::vector<Var>& s,
                           const std::optional<std::vector<Var>>& universe = std::nullopt);

// Two distinct models of F that agree on S, or nullopt when S is an
// independent support.
std::optional<std::pair<Assignment, Assignment>> support_counterexample(const CnfFormula& f,
                                                                        const std::vector<Var>& s, Oracle& oracle);
bool is_independent_support(const CnfFormula& f, const std::vector<Var>& s, Oracle& oracle);

// Variables of V (ascending) that the clauses around them define in terms
// of their neighbours; the clauses used by each hit are removed before
// later candidates are examined.
std::vector<Var> find_local_dependencies(const CnfFormula& f, const std::vector<Var>& v, Oracle& oracle);

class NotASupport : public std::runtime_error {
 public:
  NotASupport(Assignment a, Assignment b)
      : std::runtime_error("candidate set is not an independent support"), first(std::move(a)), second(std::move(b)) {}
  Assignment first, second;  // distinct models agreeing on the candidate set
};

struct GmusInstance {
  CnfFormula omega;                         // remainder over x, y and b variables
  std::vector<Var> group_vars;              // group k is x_v = y_v for v = group_vars[k]
  std::vector<std::vector<Clause>> groups;  // two clauses each
};

// Groups for V \ U; throws NotASupport when V is not a support.
GmusInstance translate_to_gmus(const CnfFormula& f, const std::vector<Var>& u, const std::vector<Var>& v,
                               Oracle& oracle);

struct GmusResult {
  std::vector<std::size_t> kept;  // group indices, ascending
  bool minimal = true;
  std::uint64_t sat_calls = 0;
};

// Deletion over `order` (a permutation of group indices). budget caps the
// number of SAT calls; 0 means unlimited. On exhaustion the remaining
// untested groups stay and `minimal` is false.
GmusResult gmus_deletion(const GmusInstance& gi, const std::vector<std::size_t>& order, Oracle& oracle,
                         std::uint64_t budget = 0);

struct MisOptions {
  std::uint64_t seed = 0;
  std::uint64_t budget = 0;     // SAT calls in the deletion phase, 0 = unlimited
  bool local_deps = true;
  bool repair = true;           // grow a non-support V before minimizing
};

struct SupportSets {
  std::vector<Var> u, v, z, result;
  bool minimal = true;
  bool repaired = false;        // V was not a support and was grown first
  bool pruning_dropped = false; // V \ Z lost the support property, Z ignored
  std::uint64_t sat_calls = 0;
};

// U and V default to empty and every variable. Group order is a seeded
// shuffle, so different seeds can give different minimal supports.
SupportSets mis(const CnfFormula& f, const std::vector<Var>& u, const std::optional<std::vector<Var>>& v,
                const MisOptions& opts, Oracle& oracle);

}  // namespace cellcount
