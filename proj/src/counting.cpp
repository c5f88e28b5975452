// SPDX-License-Identifier: MIT
#include "cellcount/counting.hpp"

#include <algorithm>
#include <cmath>

namespace cellcount {

std::size_t CountParams::limit() const {
  auto l = static_cast<std::size_t>(std::ceil(thresh));
  while (l > 0 && static_cast<long double>(l - 1) >= thresh) --l;
  while (static_cast<long double>(l) < thresh) ++l;
  return l;
}

CountParams compute_count_params(double epsilon, double delta) {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (!(delta > 0) || delta > 1) throw std::invalid_argument("delta must lie in (0, 1]");
  CountParams p;
  p.epsilon = epsilon;
  p.delta = delta;
  const long double e = epsilon;
  const long double inv = 1.0L + 1.0L / e;
  p.thresh = 1.0L + 9.84L * (1.0L + e / (1.0L + e)) * inv * inv;
  const long double target = 3.0L / static_cast<long double>(delta);
  auto t = static_cast<long long>(std::ceil(17.0L * std::log2(target)));
  // t is the least integer with 2^(t/17) >= 3/delta.
  while (t > 1 && std::exp2(static_cast<long double>(t - 1) / 17.0L) >= target) --t;
  while (std::exp2(static_cast<long double>(t) / 17.0L) < target) ++t;
  p.t = static_cast<std::uint32_t>(std::max<long long>(t, 1));
  return p;
}

BigInt ApproxCount::value() const {
  BigInt v = significand;
  v <<= exponent2;
  return v;
}

HashSliceProbe::HashSliceProbe(Oracle& oracle, const ProblemInstance& inst, std::shared_ptr<const XorHash> h,
                               std::size_t limit)
    : oracle_(oracle), inst_(inst), hash_(std::move(h)), limit_(limit) {}

std::size_t HashSliceProbe::cell_size(std::uint32_t m) {
  if (auto it = memo_.find(m); it != memo_.end()) return it->second;
  OracleQuery q;
  q.formula = &inst_.formula;
  q.sampling = inst_.sampling;
  q.limit = limit_;
  q.extra_xors = to_xor_clauses(prefix(hash_, m), inst_.sampling);
  ++queries_;
  const std::size_t n = oracle_.bounded_sat(q).size();
  memo_[m] = n;
  return n;
}

std::uint32_t log_sat_search(std::uint32_t s_size, SliceProbe& probe, const CountParams& params, std::uint32_t m_prev,
                             SearchTrace* trace) {
  if (s_size < 2) throw std::invalid_argument("log_sat_search needs |S| >= 2");
  const std::uint32_t top = s_size - 1;
  std::vector<std::int8_t> big(s_size, -1);
  big[0] = 1;
  big[top] = 0;
  std::uint32_t lo = 0, hi = top;
  m_prev = std::clamp<std::uint32_t>(m_prev, 1, top);
  std::uint32_t m = m_prev;
  auto dist = [&](std::uint32_t a) { return a > m_prev ? a - m_prev : m_prev - a; };
  while (true) {
    bool is_big;
    if (big[m] >= 0) {
      is_big = big[m] == 1;
    } else {
      if (trace) {
        trace->probes.push_back(m);
        if (dist(m) >= 3) ++trace->outside_window;
      }
      is_big = params.is_big(probe.cell_size(m));
    }
    if (is_big) {
      if (m == top) throw std::logic_error("log_sat_search: last slice reported big");
      if (big[m + 1] == 0) return m + 1;
      for (std::uint32_t i = 1; i <= m; ++i) big[i] = 1;
      lo = m;
      if (dist(m) < 3) {
        m = m + 1;
      } else if (2 * m < s_size) {
        m = 2 * m;
      } else {
        m = (hi + m) / 2;
      }
    } else {
      if (m == 0) throw std::logic_error("log_sat_search: slice 0 reported small");
      if (big[m - 1] == 1) return m;
      for (std::uint32_t i = m; i <= top; ++i) big[i] = 0;
      hi = m;
      if (dist(m) < 3) {
        m = m - 1;
      } else {
        m = (m + lo) / 2;
      }
    }
  }
}

CoreOutcome approxmc2_core(std::uint32_t s_size, SliceProbe& probe, const CountParams& params,
                           std::uint32_t prev_exponent, SearchTrace* trace) {
  CoreOutcome out;
  if (params.is_big(probe.cell_size(s_size - 1))) {
    out.failed = true;
    return out;
  }
  out.m = log_sat_search(s_size, probe, params, prev_exponent, trace);
  out.nsols = probe.cell_size(out.m);
  return out;
}

CoreOutcome approxmc2_core(const ProblemInstance& inst, Oracle& oracle, const CountParams& params,
                           std::uint32_t prev_exponent, Rng& rng) {
  const auto s = static_cast<std::uint32_t>(inst.sampling.size());
  if (s < 2) throw std::invalid_argument("hashing needs a sampling set of at least two variables");
  auto h = std::make_shared<const XorHash>(draw_hash(s, s - 1, rng));
  HashSliceProbe probe(oracle, inst, h, params.limit());
  return approxmc2_core(s, probe, params, prev_exponent);
}

ApproxCount median_estimate(std::vector<ApproxCount> estimates) {
  if (estimates.empty()) throw std::invalid_argument("median of an empty list");
  std::vector<std::pair<BigInt, std::size_t>> keyed;
  keyed.reserve(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) keyed.emplace_back(estimates[i].value(), i);
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return estimates[keyed[(keyed.size() - 1) / 2].second];
}

CountResult approxmc2(const ProblemInstance& inst, double epsilon, double delta, std::uint64_t seed, Oracle& oracle) {
  CountResult res;
  res.params = compute_count_params(epsilon, delta);
  res.oracle = oracle.name();
  const OracleStats before = oracle.stats();
  auto finish = [&]() {
    const OracleStats& after = oracle.stats();
    res.stats.oracle_queries = after.queries - before.queries;
    res.stats.sat_calls = after.sat_calls - before.sat_calls;
    res.stats.decisions = after.decisions - before.decisions;
  };

  OracleQuery q = make_query(inst, res.params.limit());
  q.weights = nullptr;
  const SolutionSet y = oracle.bounded_sat(q);
  if (!res.params.is_big(y.size())) {
    res.count.significand = static_cast<unsigned long>(y.size());
    res.count.exact = true;
    finish();
    return res;
  }

  Rng rng(seed);
  std::uint32_t prev_exponent = 1;  // nCells = 2
  std::vector<ApproxCount> estimates;
  for (std::uint32_t i = 0; i < res.params.t; ++i) {
    const CoreOutcome c = approxmc2_core(inst, oracle, res.params, prev_exponent, rng);
    ++res.stats.cores;
    if (c.failed) {
      ++res.stats.failed_cores;
      continue;
    }
    estimates.push_back(ApproxCount{BigInt(static_cast<unsigned long>(c.nsols)), c.m, false});
    prev_exponent = c.m;
  }
  finish();
  if (estimates.empty()) throw AllCoresFailed(res.stats.failed_cores);
  res.count = median_estimate(std::move(estimates));
  return res;
}

CountResult approxmc2(const ProblemInstance& inst, double epsilon, double delta, std::uint64_t seed) {
  if (is_dnf(inst.formula)) {
    DnfOracle o;
    return approxmc2(inst, epsilon, delta, seed, o);
  }
  auto o = make_default_oracle();
  return approxmc2(inst, epsilon, delta, seed, *o);
}

CountResult approx_dnf_count(const ProblemInstance& inst, double epsilon, double delta, std::uint64_t seed) {
  if (!is_dnf(inst.formula)) throw std::invalid_argument("approx_dnf_count requires a DNF instance");
  DnfOracle o;
  return approxmc2(inst, epsilon, delta, seed, o);
}

}  // namespace cellcount
