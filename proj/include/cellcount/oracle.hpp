// SPDX-License-Identifier: MIT
//
// Bounded model enumeration projected on a sampling set. Three backends
// share one query type: the in-process DPLL solver, an external DIMACS
// solver driven through a subprocess, and a polynomial enumerator for
// DNF formulas conjoined with XOR constraints.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cellcount/formula.hpp"

namespace cellcount {

struct Solution {
  BitVec projection;  // values of S in S order
  Assignment model;   // a full model extending the projection
  Rational weight;
};

// Returns true to halt enumeration after the solution it is shown.
using StopRule = std::function<bool(const Solution&)>;

struct OracleQuery {
  const Formula* formula = nullptr;
  std::vector<XorClause> extra_xors;
  SamplingSet sampling;
  std::size_t limit = 1;
  StopRule stop;
  const WeightMap* weights = nullptr;  // null: every solution weighs 1
};

OracleQuery make_query(const ProblemInstance& p, std::size_t limit);

struct SolutionSet {
  std::vector<Solution> solutions;
  Rational total_weight{0};
  Rational min_weight_seen{0};  // 0 when empty
  bool stopped = false;         // the stop rule fired

  std::size_t size() const { return solutions.size(); }
  bool empty() const { return solutions.empty(); }
  void add(Solution s);
};

struct OracleStats {
  std::uint64_t queries = 0;
  std::uint64_t sat_calls = 0;  // one per model found plus one per exhausting call
  std::uint64_t decisions = 0;  // DPLL decision events
  std::uint64_t solver_invocations = 0;
};

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual SolutionSet bounded_sat(const OracleQuery& q) = 0;
  virtual std::string name() const = 0;
  const OracleStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }

 protected:
  OracleStats stats_;
};

// CNF through Dpll; DNF queries go to dnf_bounded_sat.
class BuiltinOracle : public Oracle {
 public:
  explicit BuiltinOracle(std::uint64_t decision_budget = 0) : budget_(decision_budget) {}
  SolutionSet bounded_sat(const OracleQuery& q) override;
  std::string name() const override { return "builtin"; }

 private:
  std::uint64_t budget_;
};

class DnfOracle : public Oracle {
 public:
  SolutionSet bounded_sat(const OracleQuery& q) override;
  std::string name() const override { return "dnf-xor"; }
};

struct SolverCommand {
  std::string command_template;  // "{input}" is replaced by the DIMACS path
  bool native_xor = false;
  std::string model_prefix = "v";
  double timeout_seconds = 2500.0;
};

// "builtin" (or empty) yields nullopt. Otherwise an optional "xor:" prefix
// declares native XOR support and the rest is the command template.
std::optional<SolverCommand> parse_solver_spec(const std::string& spec);

class ExternalOracle : public Oracle {
 public:
  explicit ExternalOracle(SolverCommand cmd) : cmd_(std::move(cmd)) {}
  SolutionSet bounded_sat(const OracleQuery& q) override;
  std::string name() const override { return "external"; }
  const SolverCommand& command() const { return cmd_; }

 private:
  SolverCommand cmd_;
};

// Honors CELLCOUNT_SOLVER; defaults to the builtin solver.
std::unique_ptr<Oracle> make_default_oracle();

SolutionSet dnf_bounded_sat(const OracleQuery& q, OracleStats* stats = nullptr);
SolutionSet external_bounded_sat(const OracleQuery& q, const SolverCommand& cmd, OracleStats* stats = nullptr);

// One model of f and the extra XORs, or nullopt when unsatisfiable.
std::optional<Assignment> builtin_solve(const CnfFormula& f, const std::vector<XorClause>& extra = {},
                                        std::uint64_t decision_budget = 0, std::uint64_t* decisions = nullptr);

// Tseitin chunking: lists longer than chunk_size are cut into pieces of
// chunk_size - 1 original literals plus one fresh parity variable.
// `next_fresh` is the first unused variable index and is advanced.
std::vector<Clause> blast_xor_to_cnf(const XorClause& x, Var& next_fresh, std::size_t chunk_size = 4);

}  // namespace cellcount
