// SPDX-License-Identifier: MIT
#include "cellcount/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "cellcount/hashing.hpp"

namespace cellcount {

std::string to_string(SamplerVariant v) {
  switch (v) {
    case SamplerVariant::unigen:
      return "unigen";
    case SamplerVariant::unigen2:
      return "unigen2";
    case SamplerVariant::weightgen:
      return "weightgen";
  }
  return "?";
}

std::size_t SampleParams::limit() const {
  if (variant == SamplerVariant::unigen2) return static_cast<std::size_t>(hi_thresh);
  return static_cast<std::size_t>(std::floor(hi_thresh)) + 1;
}

bool SampleParams::in_range(double size) const {
  if (variant == SamplerVariant::unigen2) return lo_thresh <= size && size < hi_thresh;
  return lo_thresh <= size && size <= hi_thresh;
}

namespace {

// Root of f(kappa) = eps on [0, 1); f is strictly increasing there.
double solve_kappa(double eps, double a, double b) {
  auto f = [&](double k) { return (1 + k) * (a + b / ((1 - k) * (1 - k))) - 1; };
  double lo = 0, hi = 1;
  while (hi - lo > 1e-12) {
    const double mid = (lo + hi) / 2;
    (f(mid) < eps ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

}  // namespace

SampleParams compute_kappa_pivot(double epsilon, SamplerVariant variant) {
  SampleParams p;
  p.variant = variant;
  p.epsilon = epsilon;
  switch (variant) {
    case SamplerVariant::unigen: {
      if (!(epsilon > 1.71)) throw std::invalid_argument("unigen needs epsilon > 1.71");
      p.kappa = solve_kappa(epsilon, 2.23, 0.48);
      p.pivot = static_cast<std::uint32_t>(std::ceil(3 * std::exp(0.5) * std::pow(1 + 1 / p.kappa, 2)));
      p.hi_thresh = 1 + (1 + p.kappa) * p.pivot;
      p.lo_thresh = p.pivot / (1 + p.kappa);
      break;
    }
    case SamplerVariant::unigen2: {
      if (!(epsilon >= 6.84)) throw std::invalid_argument("unigen2 needs epsilon >= 6.84");
      p.kappa = solve_kappa(epsilon, 7.44, 0.392);
      p.pivot = static_cast<std::uint32_t>(std::ceil(4.03 * std::pow(1 + 1 / p.kappa, 2)));
      p.hi_thresh = std::ceil(1 + std::sqrt(2.0) * (1 + p.kappa) * p.pivot);
      p.lo_thresh = std::floor(p.pivot / (std::sqrt(2.0) * (1 + p.kappa)));
      break;
    }
    case SamplerVariant::weightgen: {
      if (!(epsilon > 6.84)) throw std::invalid_argument("weightgen needs epsilon > 6.84");
      p.kappa = solve_kappa(epsilon, 7.55, 0.29);
      p.pivot = static_cast<std::uint32_t>(std::ceil(4.03 * std::pow(1 + 1 / p.kappa, 2)));
      p.hi_thresh = 1 + std::sqrt(2.0) * (1 + p.kappa) * p.pivot;
      p.lo_thresh = p.pivot / (std::sqrt(2.0) * (1 + p.kappa));
      break;
    }
  }
  return p;
}

namespace {

Rational pow2(std::int64_t e) {
  BigInt b = 1;
  if (e >= 0) {
    b <<= static_cast<mp_bitcnt_t>(e);
    return Rational(b);
  }
  b <<= static_cast<mp_bitcnt_t>(-e);
  return Rational(BigInt(1), b);
}

double approx_log2(const Rational& x) {
  long en = 0, ed = 0;
  const double mn = mpz_get_d_2exp(&en, x.get_num_mpz_t());
  const double md = mpz_get_d_2exp(&ed, x.get_den_mpz_t());
  return std::log2(mn / md) + static_cast<double>(en - ed);
}

}  // namespace

std::int64_t ceil_log2(const Rational& x) {
  if (!(x > 0)) throw std::invalid_argument("log of a non-positive value");
  auto k = static_cast<std::int64_t>(std::ceil(approx_log2(x)));
  while (x > pow2(k)) ++k;
  while (x <= pow2(k - 1)) --k;
  return k;
}

std::int64_t round_log2(const Rational& x) {
  if (!(x > 0)) throw std::invalid_argument("log of a non-positive value");
  // round(log2 x) = largest k with 2^(2k-1) <= x^2.
  const Rational sq = x * x;
  auto k = static_cast<std::int64_t>(std::floor(approx_log2(x) + 0.5));
  while (!(pow2(2 * k - 1) <= sq)) --k;
  while (pow2(2 * k + 1) <= sq) ++k;
  return k;
}

BigInt uniform_below(const BigInt& n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("uniform_below needs n >= 1");
  const std::size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
  while (true) {
    BigInt v = 0;
    std::size_t left = bits;
    while (left > 0) {
      const std::size_t take = std::min<std::size_t>(left, 64);
      const std::uint64_t chunk = take == 64 ? rng.next() : (rng.next() & ((std::uint64_t{1} << take) - 1));
      v <<= static_cast<mp_bitcnt_t>(take);
      BigInt c;
      mpz_import(c.get_mpz_t(), 1, 1, sizeof(chunk), 0, 0, &chunk);
      v += c;
      left -= take;
    }
    if (v < n) return v;
  }
}

std::size_t weighted_index(const std::vector<Rational>& weights, Rng& rng) {
  if (weights.empty()) throw std::invalid_argument("weighted choice from an empty set");
  BigInt den = 1;
  for (const auto& w : weights) {
    if (!(w > 0)) throw std::invalid_argument("weighted choice needs positive weights");
    mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), w.get_den_mpz_t());
  }
  std::vector<BigInt> scaled;
  scaled.reserve(weights.size());
  BigInt total = 0;
  for (const auto& w : weights) {
    scaled.push_back(w.get_num() * (den / w.get_den()));
    total += scaled.back();
  }
  BigInt u = uniform_below(total, rng);
  for (std::size_t j = 0; j < scaled.size(); ++j) {
    if (u < scaled[j]) return j;
    u -= scaled[j];
  }
  return scaled.size() - 1;
}

namespace {

std::uint32_t width(const ProblemInstance& inst) { return static_cast<std::uint32_t>(inst.sampling.size()); }

// Query for the cell at slice i of h; slices past the hash width have no
// defined cell and come back empty.
SolutionSet hashed_cell(Oracle& oracle, const ProblemInstance& inst, const std::shared_ptr<const XorHash>& h,
                        std::int64_t i, std::size_t limit) {
  if (i < 0 || i > static_cast<std::int64_t>(h->rows())) return {};
  OracleQuery q = make_query(inst, limit);
  q.extra_xors = to_xor_clauses(prefix(h, static_cast<std::uint32_t>(i)), inst.sampling);
  return oracle.bounded_sat(q);
}

std::uint32_t clamp_width(std::int64_t w, std::uint32_t s) {
  return static_cast<std::uint32_t>(std::clamp<std::int64_t>(w, 0, s));
}

SampleBatch uniform_from(const std::vector<Solution>& ys, std::size_t count, Rng& rng) {
  SampleBatch b;
  b.exact_path = true;
  for (std::size_t k = 0; k < count; ++k) b.samples.push_back(ys[rng.below(ys.size())]);
  return b;
}

SampleBatch weighted_from(const std::vector<Solution>& ys, Rng& rng) {
  std::vector<Rational> ws;
  ws.reserve(ys.size());
  for (const auto& y : ys) ws.push_back(y.weight);
  SampleBatch b;
  b.samples.push_back(ys[weighted_index(ws, rng)]);
  return b;
}

void check_weighted_support(const ProblemInstance& inst) {
  for (const auto& [v, w] : inst.weights.entries()) {
    (void)w;
    if (std::find(inst.sampling.begin(), inst.sampling.end(), v) == inst.sampling.end())
      throw std::invalid_argument("weighted variable " + std::to_string(v) + " is not in the sampling set");
  }
}

}  // namespace

SampleBatch unigen_pick(std::int64_t q, const SampleParams& p, const CellFn& cell, Rng& rng) {
  SampleBatch b;
  for (std::int64_t i = q - 3; i <= q; ++i) {
    if (i < 0) continue;
    const SolutionSet y = cell(i);
    b.probed.push_back(i);
    if (p.in_range(static_cast<double>(y.size()))) {
      b.slice = i;
      b.samples.push_back(y.solutions[rng.below(y.size())]);
      return b;
    }
  }
  b.failed = true;
  return b;
}

UnigenSetup unigen_prepare(const ProblemInstance& inst, double epsilon, std::uint64_t seed, Oracle& oracle) {
  UnigenSetup s;
  s.params = compute_kappa_pivot(epsilon, SamplerVariant::unigen);
  SolutionSet all = oracle.bounded_sat(make_query(inst, s.params.limit()));
  if (all.empty()) throw Unsatisfiable();
  if (static_cast<double>(all.size()) <= s.params.hi_thresh) {
    s.exhaustive = std::move(all.solutions);
    return s;
  }
  s.count = approxmc2(inst, 0.8, 0.8, Rng::derive(seed, 0), oracle);
  s.q = ceil_log2(Rational(s.count->count.value()) * Rational(9, 5) / s.params.pivot);
  return s;
}

SampleBatch unigen_draw(const ProblemInstance& inst, const UnigenSetup& setup, Rng& rng, Oracle& oracle) {
  if (setup.exhaustive) return uniform_from(*setup.exhaustive, 1, rng);
  const std::uint32_t s = width(inst);
  auto h = std::make_shared<const XorHash>(draw_hash(s, s - 1, rng));
  const std::size_t limit = setup.params.limit();
  return unigen_pick(setup.q, setup.params, [&](std::int64_t i) { return hashed_cell(oracle, inst, h, i, limit); },
                     rng);
}

SampleBatch unigen_sample(const ProblemInstance& inst, double epsilon, std::uint64_t seed, Oracle& oracle) {
  const UnigenSetup setup = unigen_prepare(inst, epsilon, seed, oracle);
  Rng rng = Rng(seed).child(1);
  return unigen_draw(inst, setup, rng, oracle);
}

std::int64_t hash_bits_from(std::size_t cell, std::uint32_t i, std::uint32_t pivot) {
  if (cell == 0 || pivot == 0) throw std::invalid_argument("hash_bits_from needs a nonempty cell and a pivot");
  return round_log2(Rational(static_cast<long>(cell)) * pow2(i) * Rational(9, 5) / pivot);
}

std::optional<SamplerSetup> unigen2_estimate(const ProblemInstance& inst, const SampleParams& p, Rng& rng,
                                             Oracle& oracle) {
  const std::uint32_t n = width(inst);
  for (std::uint32_t i = 1; i <= n; ++i) {
    auto h = std::make_shared<const XorHash>(draw_hash(n, i, rng));
    const SolutionSet y = hashed_cell(oracle, inst, h, i, 61);
    if (y.size() >= 1 && y.size() <= 60) {
      SamplerSetup s;
      s.params = p;
      s.lo_thresh = static_cast<std::uint32_t>(p.lo_thresh);
      s.thresh = static_cast<std::uint32_t>(p.hi_thresh);
      s.hash_bits = hash_bits_from(y.size(), i, p.pivot);
      s.estimate_slice = i;
      s.estimate_cell = y.size();
      return s;
    }
  }
  return std::nullopt;
}

namespace {

// Exhaustive setup when |R| <= max(60, thresh), else nullopt.
std::optional<SamplerSetup> small_unigen2_setup(const ProblemInstance& inst, const SampleParams& p, Oracle& oracle) {
  const std::size_t limit = std::max<std::size_t>(61, static_cast<std::size_t>(p.hi_thresh) + 1);
  SolutionSet all = oracle.bounded_sat(make_query(inst, limit));
  if (all.empty()) throw Unsatisfiable();
  if (all.size() >= limit) return std::nullopt;
  SamplerSetup s;
  s.params = p;
  s.lo_thresh = static_cast<std::uint32_t>(p.lo_thresh);
  s.thresh = static_cast<std::uint32_t>(p.hi_thresh);
  s.exhaustive = std::move(all.solutions);
  return s;
}

}  // namespace

std::optional<SamplerSetup> unigen2_setup(const ProblemInstance& inst, double epsilon, std::uint64_t seed,
                                          Oracle& oracle) {
  const SampleParams p = compute_kappa_pivot(epsilon, SamplerVariant::unigen2);
  if (auto s = small_unigen2_setup(inst, p, oracle)) return s;
  Rng rng(seed);
  return unigen2_estimate(inst, p, rng, oracle);
}

SampleBatch unigen2_pick(const std::vector<std::int64_t>& order, const SamplerSetup& setup, const CellFn& cell,
                         Rng& rng) {
  SampleBatch b;
  for (std::int64_t i : order) {
    if (i < 0) continue;
    SolutionSet y = cell(i);
    b.probed.push_back(i);
    if (setup.lo_thresh <= y.size() && y.size() < setup.thresh) {
      b.slice = i;
      // Partial Fisher-Yates: the first loThresh entries are a uniform
      // subset in uniform order.
      auto& ys = y.solutions;
      for (std::size_t k = 0; k < setup.lo_thresh; ++k) {
        const std::size_t j = k + rng.below(ys.size() - k);
        std::swap(ys[k], ys[j]);
        b.samples.push_back(ys[k]);
      }
      return b;
    }
  }
  b.failed = true;
  return b;
}

Unigen2Sampler::Unigen2Sampler(const ProblemInstance& inst, const SamplerSetup& setup, Oracle& oracle, Rng rng)
    : inst_(inst), setup_(setup), oracle_(oracle), rng_(std::move(rng)) {}

std::vector<std::int64_t> Unigen2Sampler::next_order() const {
  std::vector<std::int64_t> order{setup_.hash_bits - 2, setup_.hash_bits - 1, setup_.hash_bits};
  if (last_) {
    auto it = std::find(order.begin(), order.end(), *last_);
    if (it != order.end()) std::rotate(order.begin(), it, it + 1);
  }
  return order;
}

SampleBatch Unigen2Sampler::generate() {
  SampleBatch b = generate(next_order());
  if (!b.failed && !b.exact_path) last_ = b.slice;
  return b;
}

SampleBatch Unigen2Sampler::generate(const std::vector<std::int64_t>& order) {
  if (setup_.exhaustive) return uniform_from(*setup_.exhaustive, setup_.lo_thresh, rng_);
  const std::uint32_t s = width(inst_);
  auto h = std::make_shared<const XorHash>(draw_hash(s, clamp_width(setup_.hash_bits, s), rng_));
  const std::size_t limit = setup_.thresh;
  return unigen2_pick(
      order, setup_, [&](std::int64_t i) { return hashed_cell(oracle_, inst_, h, i, limit); }, rng_);
}

SampleBatch unigen2_generate(const ProblemInstance& inst, const SamplerSetup& setup, std::uint64_t seed,
                             Oracle& oracle) {
  Unigen2Sampler sampler(inst, setup, oracle, Rng(seed));
  return sampler.generate();
}

ParallelResult unigen2_parallel(const ProblemInstance& inst, double epsilon, std::size_t n, std::uint32_t workers,
                                std::uint64_t seed, std::uint32_t max_retries, const OracleFactory& make_oracle) {
  if (workers < 1) throw std::invalid_argument("need at least one worker");
  const SampleParams p = compute_kappa_pivot(epsilon, SamplerVariant::unigen2);
  ParallelResult res;
  {
    auto oracle = make_oracle();
    std::optional<SamplerSetup> setup = small_unigen2_setup(inst, p, *oracle);
    Rng rng = Rng(seed).child(0);
    while (!setup) {
      if (res.estimate_attempts > max_retries)
        throw RetryCapExceeded("parameter estimation failed " + std::to_string(res.estimate_attempts) + " times");
      ++res.estimate_attempts;
      setup = unigen2_estimate(inst, p, rng, *oracle);
    }
    res.setup = std::move(*setup);
  }
  if (res.setup.lo_thresh == 0) throw std::invalid_argument("loThresh is zero; epsilon too large");

  const std::uint64_t calls = (n + res.setup.lo_thresh - 1) / res.setup.lo_thresh;
  res.calls_per_worker.assign(workers, calls / workers);
  for (std::uint32_t w = 0; w < calls % workers; ++w) ++res.calls_per_worker[w];

  std::vector<std::vector<Solution>> out(workers);
  std::vector<std::uint64_t> failures(workers, 0);
  std::vector<std::exception_ptr> errors(workers);
  auto run = [&](std::uint32_t w) {
    try {
      auto oracle = make_oracle();
      Unigen2Sampler sampler(inst, res.setup, *oracle, Rng(seed).child(w + 1));
      for (std::uint64_t c = 0; c < res.calls_per_worker[w]; ++c) {
        std::uint32_t attempt = 0;
        while (true) {
          SampleBatch b = sampler.generate();
          if (!b.failed) {
            for (auto& s : b.samples) out[w].push_back(std::move(s));
            break;
          }
          ++failures[w];
          if (++attempt > max_retries)
            throw RetryCapExceeded("worker " + std::to_string(w) + " exhausted " + std::to_string(max_retries) +
                                   " retries");
        }
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> threads;
    for (std::uint32_t w = 0; w < workers; ++w) threads.emplace_back(run, w);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (std::uint32_t w = 0; w < workers; ++w) {
    res.failed_calls += failures[w];
    for (auto& s : out[w]) res.samples.push_back(std::move(s));
  }
  return res;
}

SampleBatch weightgen_pick(std::int64_t q, const SampleParams& p, const Rational& w_max, const WeightCellFn& cell,
                           Rng& rng) {
  SampleBatch b;
  Rational w = w_max;
  const Rational lo(p.lo_thresh), hi(p.hi_thresh);
  for (std::int64_t i = q - 3; i <= q; ++i) {
    if (i < 0) continue;
    BoundedWeightResult y = cell(i, w);
    b.probed.push_back(i);
    w = y.w_max;
    if (y.solutions.empty()) continue;
    const Rational scaled = y.solutions.total_weight / w;
    if (lo <= scaled && scaled <= hi) {
      b.slice = i;
      SampleBatch pick = weighted_from(y.solutions.solutions, rng);
      b.samples = std::move(pick.samples);
      return b;
    }
  }
  b.failed = true;
  return b;
}

WeightgenSetup weightgen_prepare(const ProblemInstance& inst, double epsilon, const Rational& r, std::uint64_t seed,
                                 Oracle& oracle) {
  if (r < 1) throw std::invalid_argument("tilt bound r must be at least 1");
  check_weighted_support(inst);
  WeightgenSetup s;
  s.params = compute_kappa_pivot(epsilon, SamplerVariant::weightgen);
  s.r = r;
  const Rational hi(s.params.hi_thresh);
  BoundedWeightResult y = bounded_weight_sat(oracle, inst, {}, hi, r, Rational(1), &s.diagnostics);
  if (y.solutions.empty()) throw Unsatisfiable();
  if (y.solutions.total_weight / y.w_max <= hi) {
    s.exhaustive = std::move(y.solutions.solutions);
    s.w_max = y.w_max;
    return s;
  }
  s.count = weightmc(inst, 0.8, 0.2, r, Rng::derive(seed, 0), oracle);
  s.w_max = s.count->w_max;
  s.q = ceil_log2(s.count->estimate * Rational(9, 5) / (s.w_max * s.params.pivot));
  return s;
}

SampleBatch weightgen_draw(const ProblemInstance& inst, const WeightgenSetup& setup, Rng& rng, Oracle& oracle) {
  if (setup.exhaustive) {
    SampleBatch b = weighted_from(*setup.exhaustive, rng);
    b.exact_path = true;
    return b;
  }
  const std::uint32_t s = width(inst);
  auto h = std::make_shared<const XorHash>(draw_hash(s, clamp_width(setup.q, s), rng));
  const Rational hi(setup.params.hi_thresh);
  auto cell = [&](std::int64_t i, const Rational& w_max) -> BoundedWeightResult {
    if (i > static_cast<std::int64_t>(h->rows())) return {{}, w_max};
    return bounded_weight_sat(oracle, inst, to_xor_clauses(prefix(h, static_cast<std::uint32_t>(i)), inst.sampling),
                              hi, setup.r, w_max);
  };
  return weightgen_pick(setup.q, setup.params, setup.w_max, cell, rng);
}

SampleBatch weightgen_sample(const ProblemInstance& inst, double epsilon, const Rational& r, std::uint64_t seed,
                             Oracle& oracle) {
  const WeightgenSetup setup = weightgen_prepare(inst, epsilon, r, seed, oracle);
  Rng rng = Rng(seed).child(1);
  return weightgen_draw(inst, setup, rng, oracle);
}

std::string sample_line(const SamplingSet& s, const BitVec& projection) {
  std::vector<std::pair<Var, bool>> lits;
  lits.reserve(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) lits.emplace_back(s[k], projection.get(k));
  std::sort(lits.begin(), lits.end());
  std::string out;
  for (const auto& [v, val] : lits) {
    if (!val) out += '-';
    out += std::to_string(v);
    out += ' ';
  }
  out += '0';
  return out;
}

}  // namespace cellcount
