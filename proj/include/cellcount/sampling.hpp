// SPDX-License-Identifier: MIT
//
// Hashing-based witness generation. Each sampler has a one-time prepare
// stage per (formula, tolerance) and a per-call draw stage; a draw either
// returns witnesses or fails (the caller retries with a fresh stream).
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cellcount/counting.hpp"
#include "cellcount/formula.hpp"
#include "cellcount/oracle.hpp"
#include "cellcount/rng.hpp"
#include "cellcount/weighted.hpp"

namespace cellcount {

enum class SamplerVariant { unigen, unigen2, weightgen };

std::string to_string(SamplerVariant v);

struct SampleParams {
  SamplerVariant variant = SamplerVariant::unigen2;
  double epsilon = 16;
  double kappa = 0;
  std::uint32_t pivot = 0;
  double hi_thresh = 0;  // unigen2: integer thresh, exclusive upper bound
  double lo_thresh = 0;  // unigen2: integer loThresh, also the batch size

  // BoundedSAT limit that separates "fits" from "too big".
  std::size_t limit() const;
  bool in_range(double size) const;
};

// Floors: unigen > 1.71, unigen2 >= 6.84, weightgen > 6.84.
SampleParams compute_kappa_pivot(double epsilon, SamplerVariant variant);

// The instance has no solution at all; distinct from a failed draw.
class Unsatisfiable : public std::runtime_error {
 public:
  Unsatisfiable() : std::runtime_error("formula is unsatisfiable") {}
};

// Smallest k with x <= 2^k, and round-half-up of log2 x. x > 0, exact.
std::int64_t ceil_log2(const Rational& x);
std::int64_t round_log2(const Rational& x);

// Uniform in [0, n) from the stream. n >= 1.
BigInt uniform_below(const BigInt& n, Rng& rng);
// Index j with probability weights[j] / sum, by exact cumulative inversion.
std::size_t weighted_index(const std::vector<Rational>& weights, Rng& rng);

struct SampleBatch {
  bool failed = false;
  std::vector<Solution> samples;
  bool exact_path = false;   // drawn from the fully enumerated solution set
  std::int64_t slice = -1;   // slice that produced the cell
  std::vector<std::int64_t> probed;
};

// Cell at slice i of one drawn (h, alpha), enumerated up to the sampler's
// limit. Injected so the probe loops can be driven by scripted profiles.
using CellFn = std::function<SolutionSet(std::int64_t i)>;

// UniGen probe loop over i = q-3 .. q.
SampleBatch unigen_pick(std::int64_t q, const SampleParams& p, const CellFn& cell, Rng& rng);

struct UnigenSetup {
  SampleParams params;
  std::optional<std::vector<Solution>> exhaustive;  // small path
  std::int64_t q = 0;
  std::optional<CountResult> count;
};

UnigenSetup unigen_prepare(const ProblemInstance& inst, double epsilon, std::uint64_t seed, Oracle& oracle);
SampleBatch unigen_draw(const ProblemInstance& inst, const UnigenSetup& setup, Rng& rng, Oracle& oracle);
SampleBatch unigen_sample(const ProblemInstance& inst, double epsilon, std::uint64_t seed, Oracle& oracle);

struct SamplerSetup {
  SampleParams params;
  std::int64_t hash_bits = 0;
  std::uint32_t lo_thresh = 0;
  std::uint32_t thresh = 0;
  std::optional<std::vector<Solution>> exhaustive;  // |R| <= max(60, thresh)
  std::uint32_t estimate_slice = 0;                 // i that produced hash_bits
  std::size_t estimate_cell = 0;                    // |Y| at that i
};

// hashBits = round(log2(|Y|) + i + log2(1.8) - log2(pivot)), exact.
std::int64_t hash_bits_from(std::size_t cell, std::uint32_t i, std::uint32_t pivot);

// Estimation loop only; nullopt is a failed estimate.
std::optional<SamplerSetup> unigen2_estimate(const ProblemInstance& inst, const SampleParams& p, Rng& rng,
                                             Oracle& oracle);
// Enumerates up to max(61, thresh) solutions first; small instances get
// an exhaustive setup and skip estimation.
std::optional<SamplerSetup> unigen2_setup(const ProblemInstance& inst, double epsilon, std::uint64_t seed,
                                          Oracle& oracle);

// UniGen2 probe loop in a given order; success takes loThresh distinct
// uniform elements of the cell.
SampleBatch unigen2_pick(const std::vector<std::int64_t>& order, const SamplerSetup& setup, const CellFn& cell,
                         Rng& rng);

// Sampler handle. Remembers the last successful slice and tries it first.
class Unigen2Sampler {
 public:
  Unigen2Sampler(const ProblemInstance& inst, const SamplerSetup& setup, Oracle& oracle, Rng rng);
  SampleBatch generate();
  // Fixed order for this call, bypassing the leapfrog heuristic.
  SampleBatch generate(const std::vector<std::int64_t>& order);
  std::vector<std::int64_t> next_order() const;

 private:
  const ProblemInstance& inst_;
  const SamplerSetup& setup_;
  Oracle& oracle_;
  Rng rng_;
  std::optional<std::int64_t> last_;
};

SampleBatch unigen2_generate(const ProblemInstance& inst, const SamplerSetup& setup, std::uint64_t seed,
                             Oracle& oracle);

using OracleFactory = std::function<std::unique_ptr<Oracle>()>;

struct ParallelResult {
  SamplerSetup setup;
  std::vector<Solution> samples;  // worker order, then call order
  std::vector<std::uint64_t> calls_per_worker;
  std::uint64_t failed_calls = 0;
  std::uint32_t estimate_attempts = 0;
};

class RetryCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ceil(N / loThresh) generate calls split across workers; worker w uses
// Rng(seed).child(w + 1) and its own oracle. Each call is retried at most
// max_retries times before the run aborts.
ParallelResult unigen2_parallel(const ProblemInstance& inst, double epsilon, std::size_t n, std::uint32_t workers,
                                std::uint64_t seed, std::uint32_t max_retries, const OracleFactory& make_oracle);

// WeightGen probe loop over i = q-3 .. q. `cell` returns the bounded
// weighted enumeration of slice i given the current wMax.
using WeightCellFn = std::function<BoundedWeightResult(std::int64_t i, const Rational& w_max)>;
SampleBatch weightgen_pick(std::int64_t q, const SampleParams& p, const Rational& w_max, const WeightCellFn& cell,
                           Rng& rng);

struct WeightgenSetup {
  SampleParams params;
  Rational r{1};
  std::optional<std::vector<Solution>> exhaustive;
  std::int64_t q = 0;
  Rational w_max{1};
  std::optional<WeightCountResult> count;
  WeightDiagnostics diagnostics;
};

WeightgenSetup weightgen_prepare(const ProblemInstance& inst, double epsilon, const Rational& r, std::uint64_t seed,
                                 Oracle& oracle);
SampleBatch weightgen_draw(const ProblemInstance& inst, const WeightgenSetup& setup, Rng& rng, Oracle& oracle);
SampleBatch weightgen_sample(const ProblemInstance& inst, double epsilon, const Rational& r, std::uint64_t seed,
                             Oracle& oracle);

// Sample line: DIMACS literals of S in ascending variable order, then 0.
std::string sample_line(const SamplingSet& s, const BitVec& projection);

}  // namespace cellcount
