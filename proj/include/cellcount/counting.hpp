// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cellcount/formula.hpp"
#include "cellcount/hashing.hpp"
#include "cellcount/oracle.hpp"
#include "cellcount/rng.hpp"

namespace cellcount {

struct CountParams {
  double epsilon = 0.8;
  double delta = 0.2;
  long double thresh = 0;  // 1 + 9.84 (1 + eps/(1+eps)) (1 + 1/eps)^2
  std::uint32_t t = 0;     // ceil(17 log2(3/delta))

  // BoundedSAT limit; a cell is big iff it reaches this many solutions.
  std::size_t limit() const;
  bool is_big(std::size_t cell_size) const { return static_cast<long double>(cell_size) >= thresh; }
};

CountParams compute_count_params(double epsilon, double delta);

// value = significand * 2^exponent2
struct ApproxCount {
  BigInt significand = 0;
  std::uint32_t exponent2 = 0;
  bool exact = false;

  BigInt value() const;
};

struct CountStats {
  std::uint64_t oracle_queries = 0;
  std::uint64_t sat_calls = 0;
  std::uint64_t decisions = 0;
  std::uint32_t cores = 0;
  std::uint32_t failed_cores = 0;
};

struct CountResult {
  ApproxCount count;
  CountParams params;
  CountStats stats;
  std::string oracle;
};

class AllCoresFailed : public std::runtime_error {
 public:
  explicit AllCoresFailed(std::uint32_t failures)
      : std::runtime_error("all " + std::to_string(failures) + " core iterations failed"), failures_(failures) {}
  std::uint32_t failures() const { return failures_; }

 private:
  std::uint32_t failures_;
};

// Size of the cell at prefix m, capped at the probe limit.
class SliceProbe {
 public:
  virtual ~SliceProbe() = default;
  virtual std::size_t cell_size(std::uint32_t m) = 0;
};

// Prefix cells of one drawn hash over an instance. Sizes are memoized
// per slice since the cell at a slice never changes for a fixed hash.
class HashSliceProbe : public SliceProbe {
 public:
  HashSliceProbe(Oracle& oracle, const ProblemInstance& inst, std::shared_ptr<const XorHash> h, std::size_t limit);
  std::size_t cell_size(std::uint32_t m) override;
  std::uint64_t queries() const { return queries_; }

 private:
  Oracle& oracle_;
  const ProblemInstance& inst_;
  std::shared_ptr<const XorHash> hash_;
  std::size_t limit_;
  std::map<std::uint32_t, std::size_t> memo_;
  std::uint64_t queries_ = 0;
};

struct SearchTrace {
  std::vector<std::uint32_t> probes;  // slice indices in query order
  std::uint32_t outside_window = 0;   // probes made while |m - mPrev| >= 3
};

// Galloping search for the first small slice. Preconditions: slice 0 is
// big and slice s_size-1 is small.
std::uint32_t log_sat_search(std::uint32_t s_size, SliceProbe& probe, const CountParams& params, std::uint32_t m_prev,
                             SearchTrace* trace = nullptr);

struct CoreOutcome {
  bool failed = false;
  std::uint32_t m = 0;
  std::size_t nsols = 0;
};

CoreOutcome approxmc2_core(std::uint32_t s_size, SliceProbe& probe, const CountParams& params,
                           std::uint32_t prev_exponent, SearchTrace* trace = nullptr);

// Draws h from H_xor(|S|, |S|-1) and alpha, then runs the core.
CoreOutcome approxmc2_core(const ProblemInstance& inst, Oracle& oracle, const CountParams& params,
                           std::uint32_t prev_exponent, Rng& rng);

// Lower median by exact comparison of significand * 2^exponent.
ApproxCount median_estimate(std::vector<ApproxCount> estimates);

CountResult approxmc2(const ProblemInstance& inst, double epsilon, double delta, std::uint64_t seed, Oracle& oracle);
CountResult approxmc2(const ProblemInstance& inst, double epsilon, double delta, std::uint64_t seed);
// Same control flow, every BoundedSAT answered by the DNF enumerator.
CountResult approx_dnf_count(const ProblemInstance& inst, double epsilon, double delta, std::uint64_t seed);

}  // namespace cellcount
