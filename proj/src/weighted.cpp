// SPDX-License-Identifier: MIT
#include "cellcount/weighted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cellcount/hashing.hpp"

namespace cellcount {

WeightParams compute_weight_params(double epsilon, double delta, const Rational& r) {
  if (!(epsilon > 0) || epsilon > 1) throw std::invalid_argument("weighted counting needs epsilon in (0, 1]");
  if (!(delta > 0) || delta > 1) throw std::invalid_argument("delta must lie in (0, 1]");
  if (r < 1) throw std::invalid_argument("tilt bound r must be at least 1");
  WeightParams p;
  p.epsilon = epsilon;
  p.delta = delta;
  p.r = r;
  const long double inv = 1.0L + 1.0L / static_cast<long double>(epsilon);
  p.pivot = 2 * static_cast<std::uint32_t>(std::ceil(std::exp(1.5L) * inv * inv));
  p.t = static_cast<std::uint32_t>(std::ceil(35.0L * std::log2(3.0L / static_cast<long double>(delta))));
  return p;
}

void WeightDiagnostics::observe(const SolutionSet& y, const Rational& w_max, const Rational& r) {
  ++bws_calls;
  models += y.size();
  max_models_per_call = std::max(max_models_per_call, y.size());
  if (w_max > 1) w_max_above_one = true;
  for (const auto& s : y.solutions) {
    if (max_weight_seen == 0 || s.weight > max_weight_seen) max_weight_seen = s.weight;
    if (min_weight_seen == 0 || s.weight < min_weight_seen) min_weight_seen = s.weight;
  }
  if (min_weight_seen > 0 && max_weight_seen > r * min_weight_seen) tilt_violation = true;
}

BoundedWeightResult bounded_weight_sat(Oracle& oracle, const ProblemInstance& inst, const std::vector<XorClause>& extra,
                                       const Rational& pivot, const Rational& r, const Rational& w_max,
                                       WeightDiagnostics* diag) {
  if (!(w_max > 0)) throw std::invalid_argument("wMax must be positive");
  if (r < 1) throw std::invalid_argument("tilt bound r must be at least 1");
  Rational w_min = w_max / r;
  Rational w_total(0);
  OracleQuery q = make_query(inst, std::numeric_limits<std::size_t>::max());
  q.extra_xors = extra;
  q.stop = [&](const Solution& s) {
    w_total += s.weight;
    if (s.weight < w_min) w_min = s.weight;
    return w_total / (w_min * r) > pivot;
  };
  BoundedWeightResult out;
  out.solutions = oracle.bounded_sat(q);
  out.w_max = w_min * r;
  if (diag) diag->observe(out.solutions, out.w_max, r);
  return out;
}

namespace {

void check_instance(const ProblemInstance& inst) {
  if (inst.sampling.empty()) throw std::invalid_argument("weighted counting needs a nonempty sampling set");
  for (const auto& [v, w] : inst.weights.entries()) {
    (void)w;
    if (!std::binary_search(inst.sampling.begin(), inst.sampling.end(), v))
      throw std::invalid_argument("weighted variable " + std::to_string(v) +
                                  " lies outside the sampling set; solution weights would be ambiguous");
  }
}

}  // namespace

WeightCoreOutcome weightmc_core(const ProblemInstance& inst, Oracle& oracle, const WeightParams& params,
                                const Rational& w_max, Rng& rng, WeightDiagnostics* diag) {
  const Rational pivot(params.pivot);
  WeightCoreOutcome out;
  BoundedWeightResult y = bounded_weight_sat(oracle, inst, {}, pivot, params.r, w_max, diag);
  out.w_max = y.w_max;
  Rational scaled = y.solutions.total_weight / y.w_max;
  if (scaled <= pivot) {
    // W(Y) / wMax, so the caller's c * wMax is W(Y).
    out.exact = true;
    out.scaled = scaled;
    return out;
  }
  const auto s = static_cast<std::uint32_t>(inst.sampling.size());
  std::uint32_t i = 0;
  do {
    ++i;
    auto h = std::make_shared<const XorHash>(draw_hash(s, i, rng));
    y = bounded_weight_sat(oracle, inst, to_xor_clauses(prefix(h, i), inst.sampling), pivot, params.r, out.w_max,
                           diag);
    out.w_max = y.w_max;
    scaled = y.solutions.total_weight / y.w_max;
  } while (!(scaled > 0 && scaled <= pivot) && i < s);
  out.i = i;
  if (scaled > pivot || y.solutions.total_weight == 0) {
    out.failed = true;
    return out;
  }
  // 2^i cells, each of expected weight W(F) / 2^i.
  out.scaled = scaled;
  mpz_mul_2exp(out.scaled.get_num_mpz_t(), out.scaled.get_num_mpz_t(), i);
  out.scaled.canonicalize();
  return out;
}

WeightCountResult weightmc(const ProblemInstance& inst, double epsilon, double delta, const Rational& r,
                           std::uint64_t seed, Oracle& oracle) {
  check_instance(inst);
  WeightCountResult res;
  res.params = compute_weight_params(epsilon, delta, r);
  res.oracle = oracle.name();
  const std::uint64_t calls_before = oracle.stats().sat_calls;
  Rng rng(seed);
  Rational w_max(1);
  std::vector<Rational> values;
  bool all_exact = true;
  for (std::uint32_t k = 0; k < res.params.t; ++k) {
    const WeightCoreOutcome c = weightmc_core(inst, oracle, res.params, w_max, rng, &res.diagnostics);
    ++res.cores;
    w_max = c.w_max;
    if (c.failed) {
      ++res.failed_cores;
      continue;
    }
    all_exact = all_exact && c.exact;
    values.push_back(c.scaled * c.w_max);
  }
  res.w_max = w_max;
  res.sat_calls = oracle.stats().sat_calls - calls_before;
  if (values.empty()) throw AllCoresFailed(res.failed_cores);
  std::sort(values.begin(), values.end());
  res.estimate = values[(values.size() - 1) / 2];
  res.exact = all_exact;
  return res;
}

WeightCountResult weightmc(const ProblemInstance& inst, double epsilon, double delta, const Rational& r,
                           std::uint64_t seed) {
  auto o = make_default_oracle();
  return weightmc(inst, epsilon, delta, r, seed, *o);
}

Rational exact_tilt(const ProblemInstance& inst, Oracle& oracle) {
  OracleQuery q = make_query(inst, std::numeric_limits<std::size_t>::max());
  Rational lo(0), hi(0);
  q.stop = [&](const Solution& s) {
    if (lo == 0 || s.weight < lo) lo = s.weight;
    if (s.weight > hi) hi = s.weight;
    return false;
  };
  oracle.bounded_sat(q);
  if (lo == 0) return Rational(1);
  return hi / lo;
}

}  // namespace cellcount
