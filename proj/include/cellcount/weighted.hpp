// SPDX-License-Identifier: MIT
//
// Hashing-based weighted model counting with a user-supplied tilt bound.
// All weight arithmetic is exact.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cellcount/counting.hpp"
#include "cellcount/formula.hpp"
#include "cellcount/oracle.hpp"
#include "cellcount/rng.hpp"

namespace cellcount {

struct WeightParams {
  double epsilon = 0.8;
  double delta = 0.2;
  std::uint32_t pivot = 0;  // 2 ceil(e^1.5 (1 + 1/eps)^2)
  std::uint32_t t = 0;      // ceil(35 log2(3/delta))
  Rational r{1};            // tilt upper bound
};

WeightParams compute_weight_params(double epsilon, double delta, const Rational& r);

// Post-hoc observations; none of these abort a run.
struct WeightDiagnostics {
  std::uint64_t bws_calls = 0;
  std::size_t max_models_per_call = 0;
  std::uint64_t models = 0;
  bool w_max_above_one = false;  // some returned wMax' exceeded 1
  bool tilt_violation = false;   // observed max/min weight ratio exceeded r
  Rational max_weight_seen{0};
  Rational min_weight_seen{0};

  void observe(const SolutionSet& y, const Rational& w_max, const Rational& r);
};

struct BoundedWeightResult {
  SolutionSet solutions;
  Rational w_max;  // w_min * r, not clamped to 1
};

// Enumerates models of F and `extra` until w_total / (w_min * r) > pivot
// or the cell is exhausted. w_min starts at w_max / r.
BoundedWeightResult bounded_weight_sat(Oracle& oracle, const ProblemInstance& inst, const std::vector<XorClause>& extra,
                                       const Rational& pivot, const Rational& r, const Rational& w_max,
                                       WeightDiagnostics* diag = nullptr);

struct WeightCoreOutcome {
  bool failed = false;
  bool exact = false;  // the unhashed cell was already light
  Rational scaled{0};  // W(cell) 2^i / wMax
  Rational w_max{1};
  std::uint32_t i = 0;
};

// Hash widths i = 1 .. |S|, a fresh h from H_xor(|S|, i) for each.
WeightCoreOutcome weightmc_core(const ProblemInstance& inst, Oracle& oracle, const WeightParams& params,
                                const Rational& w_max, Rng& rng, WeightDiagnostics* diag = nullptr);

struct WeightCountResult {
  Rational estimate{0};
  bool exact = false;
  WeightParams params;
  Rational w_max{1};
  std::uint32_t cores = 0;
  std::uint32_t failed_cores = 0;
  std::uint64_t sat_calls = 0;
  WeightDiagnostics diagnostics;
  std::string oracle;
};

// Median (lower) of c * wMax over successful cores.
WeightCountResult weightmc(const ProblemInstance& inst, double epsilon, double delta, const Rational& r,
                           std::uint64_t seed, Oracle& oracle);
WeightCountResult weightmc(const ProblemInstance& inst, double epsilon, double delta, const Rational& r,
                           std::uint64_t seed);

// Tilt of the instance: max over min model weight, by enumeration.
// Intended for small instances and tests.
Rational exact_tilt(const ProblemInstance& inst, Oracle& oracle);

}  // namespace cellcount
