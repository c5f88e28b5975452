// SPDX-License-Identifier: MIT
//
// Acceptance checks. Each criterion prints one PASS/FAIL line; the exit
// status is nonzero when any selected criterion fails. Tolerances are the
// constants below and are never adjusted at run time.
#include <boost/math/distributions/chi_squared.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "brute.hpp"
#include "cellcount/chain.hpp"
#include "cellcount/counting.hpp"
#include "cellcount/hashing.hpp"
#include "cellcount/indsupport.hpp"
#include "cellcount/relnet.hpp"
#include "cellcount/sampling.hpp"
#include "cellcount/weighted.hpp"

using namespace cellcount;

namespace {

constexpr double kEps = 0.8;
constexpr double kDelta = 0.2;
constexpr double kPacRate = 0.90;          // criteria 4, 6, 9, 12
constexpr double kGeoMeanTolerance = 0.25;  // criterion 4
constexpr double kSuccessFloor = 0.57;     // criterion 8
constexpr double kJsLimit = 0.1;           // criterion 7
constexpr double kSigmas = 4.0;            // criteria 7, 10, 13
constexpr double kChiSquareP = 0.01;       // criterion 10
constexpr double kThreshTolerance = 1e-6;  // criterion 3

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates failures; the first few are kept for the report.
struct Checker {
  bool ok = true;
  std::vector<std::string> notes;
  void require(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    if (notes.size() < 3) notes.push_back(what);
  }
  std::string failures() const {
    std::string s;
    for (const auto& n : notes) s += "; " + n;
    return s;
  }
};

double within(const Rational& est, const Rational& exact) {
  // Observed tolerance max(A/C, C/A) - 1; 0 when both are zero.
  if (exact == 0 && est == 0) return 0;
  if (exact == 0 || est == 0) return INFINITY;
  const double a = Rational(est / exact).get_d();
  return std::max(a, 1 / a) - 1;
}

bool in_pac_range(const Rational& est, const Rational& exact) {
  return est * Rational(9, 5) >= exact && est <= exact * Rational(9, 5);
}

std::string fmt(double x, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

std::string ratio(std::size_t a, std::size_t b) { return std::to_string(a) + "/" + std::to_string(b); }

double sigma(double n, double p) { return std::sqrt(n * p * (1 - p)); }

// ---------------------------------------------------------------------------

std::uint64_t count_on_chain(const ChainFormula& c, const std::function<bool(const Assignment&)>& holds) {
  std::uint64_t n = 0;
  const Var top = c.lits.back().var();
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << c.m); ++x) {
    Assignment a = make_assignment(top);
    for (std::uint32_t j = 0; j < c.m; ++j) a.set(c.lits[j].var(), (x >> j) & 1U);
    n += holds(a);
  }
  return n;
}

Outcome criterion1() {
  Checker ck;
  std::size_t cases = 0;
  for (std::uint32_t m = 1; m <= 10; ++m) {
    for (std::uint64_t k = 1; k < (std::uint64_t{1} << m); k += 2) {
      ++cases;
      const ChainFormula c = chain_formula(k, m, 1);
      const BoolExpr tree = c.tree();
      const auto cnf = c.cnf();
      const auto dnf = c.dnf();
      const auto t = count_on_chain(c, [&](const Assignment& a) { return tree.eval(a); });
      const auto cc = count_on_chain(c, [&](const Assignment& a) {
        return std::all_of(cnf.begin(), cnf.end(), [&](const Clause& cl) { return satisfies(cl, a); });
      });
      const auto dd = count_on_chain(c, [&](const Assignment& a) {
        return std::any_of(dnf.begin(), dnf.end(), [&](const Clause& cu) { return cube_holds(cu, a); });
      });
      ck.require(t == k && cc == k && dd == k, "k=" + std::to_string(k) + " m=" + std::to_string(m));
      ck.require(cnf.size() <= m && dnf.size() <= m, "size bound k=" + std::to_string(k));
    }
  }
  return {ck.ok, std::to_string(cases) + " (k, m) pairs, tree/CNF/DNF each count k" + ck.failures()};
}

// ---------------------------------------------------------------------------

Rational random_dyadic(Rng& rng, unsigned max_m) {
  const unsigned m = 1 + static_cast<unsigned>(rng.below(max_m));
  const std::uint64_t k = 2 * rng.below(std::uint64_t{1} << (m - 1)) + 1;
  return Rational(static_cast<unsigned long>(k), static_cast<unsigned long>(std::uint64_t{1} << m));
}

ProblemInstance random_weighted(Rng& rng, bool dnf, std::uint32_t max_n) {
  const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.below(max_n));
  ProblemInstance p;
  if (dnf)
    p = make_instance(brute::random_dnf(n, 1 + rng.below(4), std::min<std::uint32_t>(n, 2), rng));
  else
    p = make_instance(brute::random_kcnf(n, rng.below(2 * n), std::min<std::uint32_t>(n, 3), rng));
  unsigned bits = 0;
  for (Var v = 1; v <= n; ++v) {
    if (rng.below(2) == 0 || bits > 12) continue;
    p.weights.set(v, random_dyadic(rng, 4));
    bits += p.weights.find(v)->dyadic->m;
  }
  return p;
}

Rational constraint_weight(const Formula& f, const std::vector<WeightedConstraint>& gs) {
  const auto mf = brute::compile(f);
  Rational total(0);
  brute::for_each_model(mf, [&](std::uint64_t x) {
    const Assignment a = brute::to_assignment(x, mf.n);
    Rational w(1);
    for (const auto& g : gs)
      if (g.constraint.eval(a)) w *= g.weight;
    total += w;
  });
  return total;
}

Outcome criterion2() {
  Checker ck;
  Rng rng(2002);
  const int instances = 200;
  for (int iter = 0; iter < instances; ++iter) {
    const ProblemInstance p = random_weighted(rng, iter % 2 == 1, 10);
    const Rational w = brute::weighted_count(p);
    const Reduction a = reduce_wmc_conjunctive(p);
    const Reduction b = reduce_wmc_implicative(p);
    const Reduction c = reduce_wmc_form_preserving(p);
    ck.require(a.weight_from_count(brute::exact_count(a.instance.formula)) == w, "conjunctive #" + std::to_string(iter));
    ck.require(b.weight_from_count(brute::exact_count(b.instance.formula)) == w, "implicative #" + std::to_string(iter));
    ck.require(c.weight_from_count(brute::exact_count(c.instance.formula)) == w,
               "form-preserving #" + std::to_string(iter));
    ck.require(is_dnf(c.instance.formula) == is_dnf(p.formula), "form changed #" + std::to_string(iter));

    const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.below(10));
    const Formula g = iter % 2 ? Formula(brute::random_dnf(n, 1 + rng.below(3), std::min<std::uint32_t>(n, 2), rng))
                               : Formula(brute::random_kcnf(n, rng.below(n + 1), std::min<std::uint32_t>(n, 3), rng));
    std::vector<WeightedConstraint> cs;
    const auto groups = rng.below(4);
    for (std::uint64_t i = 0; i < groups; ++i) {
      Clause cl{Lit(1 + static_cast<Var>(rng.below(n)), rng.bit()), Lit(1 + static_cast<Var>(rng.below(n)), rng.bit())};
      cs.push_back({rng.bit() ? to_expr(cl) : BoolExpr::conj({BoolExpr::literal(cl[0]), BoolExpr::literal(cl[1])}),
                    random_dyadic(rng, 4)});
    }
    const Reduction cr = reduce_constraint_wmc(g, cs);
    ck.require(cr.weight_from_count(brute::exact_count(cr.instance.formula)) == constraint_weight(g, cs),
               "constraint #" + std::to_string(iter));
  }
  return {ck.ok, std::to_string(instances) + " instances x 4 identities, exact rational equality" + ck.failures()};
}

// ---------------------------------------------------------------------------

Outcome criterion3() {
  Checker ck;
  const SampleParams u2 = compute_kappa_pivot(16, SamplerVariant::unigen2);
  const CountParams cp = compute_count_params(kEps, kDelta);
  ck.require(u2.lo_thresh == 11, "loThresh " + fmt(u2.lo_thresh));
  ck.require(u2.hi_thresh == 64, "thresh " + fmt(u2.hi_thresh));
  ck.require(std::abs(static_cast<double>(cp.thresh) - 72.955) <= kThreshTolerance,
             "thresh " + fmt(static_cast<double>(cp.thresh), 12));
  ck.require(cp.t == 67, "t " + std::to_string(cp.t));
  return {ck.ok, "unigen2(16): loThresh " + fmt(u2.lo_thresh) + " thresh " + fmt(u2.hi_thresh) +
                     "; count(0.8, 0.2): thresh " + fmt(static_cast<double>(cp.thresh), 10) + " t " +
                     std::to_string(cp.t) + ck.failures()};
}

// ---------------------------------------------------------------------------

Outcome criterion4() {
  Rng rng(4004);
  BuiltinOracle o;
  const int instances = 50;
  int hits = 0, exact_hits = 0;
  double log_sum = 0;
  int log_terms = 0;
  for (int i = 0; i < instances; ++i) {
    ProblemInstance p;
    BigInt exact;
    do {
      const auto n = 15 + static_cast<std::uint32_t>(rng.below(8));
      const auto m = static_cast<std::size_t>(n * (2.0 + 1.5 * rng.uniform01()));
      p = make_instance(brute::random_kcnf(n, m, 3, rng));
      exact = brute::exact_count(p.formula);
    } while (exact < 1);
    const CountResult r = approxmc2(p, kEps, kDelta, 1000 + i, o);
    const Rational est(r.count.value()), c(exact);
    hits += in_pac_range(est, c);
    const double tol = within(est, c);
    if (tol == 0) {
      ++exact_hits;
    } else {
      log_sum += std::log(tol);
      ++log_terms;
    }
  }
  const double geo = log_terms ? std::exp(log_sum / log_terms) : 0;
  const bool ok = hits >= kPacRate * instances && geo <= kGeoMeanTolerance;
  return {ok, ratio(hits, instances) + " within [C/1.8, 1.8C]; geometric-mean observed tolerance " + fmt(geo) +
                  " over " + std::to_string(log_terms) + " inexact runs (" + std::to_string(exact_hits) + " exact)"};
}

// ---------------------------------------------------------------------------

std::uint32_t ceil_log2_u(std::uint64_t x) {
  std::uint32_t k = 0;
  while ((std::uint64_t{1} << k) < x) ++k;
  return k;
}

Outcome criterion5() {
  Checker ck;
  Rng rng(5005);
  BuiltinOracle o;
  const CountParams params = compute_count_params(kEps, kDelta);
  int done = 0, attempts = 0;
  std::uint32_t worst_slack = 0;
  while (done < 500 && attempts < 20000) {
    ++attempts;
    const auto n = 9 + static_cast<std::uint32_t>(rng.below(6));
    ProblemInstance p = make_instance(brute::random_kcnf(n, n / 2 + rng.below(n), 3, rng));
    if (rng.bit()) {
      SamplingSet s;
      for (Var v = 1; v <= n; ++v)
        if (rng.below(4) != 0) s.push_back(v);
      if (s.size() >= 3) p.sampling = s;
    }
    const auto s_size = static_cast<std::uint32_t>(p.sampling.size());
    auto h = std::make_shared<const XorHash>(draw_hash(s_size, s_size - 1, rng));
    std::vector<std::size_t> cells(s_size);
    for (std::uint32_t m = 0; m < s_size; ++m)
      cells[m] = brute::projected_models(p.formula, p.sampling, to_xor_clauses(prefix(h, m), p.sampling)).size();
    if (!params.is_big(cells[0]) || params.is_big(cells[s_size - 1])) continue;
    std::uint32_t m_star = 0;
    while (params.is_big(cells[m_star])) ++m_star;
    HashSliceProbe probe(o, p, h, params.limit());
    const auto m_prev = static_cast<std::uint32_t>(rng.below(s_size + 1));
    SearchTrace trace;
    const std::uint32_t got = log_sat_search(s_size, probe, params, m_prev, &trace);
    ck.require(got == m_star, "instance " + std::to_string(done) + ": got " + std::to_string(got) + " want " +
                                  std::to_string(m_star));
    const std::uint32_t bound = 3 + 2 * ceil_log2_u(m_star) + ceil_log2_u(s_size);
    ck.require(trace.outside_window <= bound, "instance " + std::to_string(done) + ": " +
                                                  std::to_string(trace.outside_window) + " calls outside window > " +
                                                  std::to_string(bound));
    worst_slack = std::max(worst_slack, trace.outside_window);
    ++done;
  }
  ck.require(done == 500, "only " + std::to_string(done) + " usable instances");
  return {ck.ok, std::to_string(done) + " instances match the brute-force m* scan; max calls outside window " +
                     std::to_string(worst_slack) + ck.failures()};
}

// ---------------------------------------------------------------------------

Outcome criterion6() {
  Rng rng(6006);
  const int instances = 40;
  int hits = 0;
  std::uint64_t decisions = 0;
  for (int i = 0; i < instances; ++i) {
    const auto n = 12 + static_cast<std::uint32_t>(rng.below(7));
    const DnfFormula d = brute::random_dnf(n, 2 + rng.below(6), 3 + static_cast<std::uint32_t>(rng.below(4)), rng);
    const ProblemInstance p = make_instance(d);
    const Rational exact(brute::exact_count(p.formula));
    const CountResult r = approx_dnf_count(p, kEps, kDelta, 600 + i);
    hits += in_pac_range(Rational(r.count.value()), exact);
    decisions += r.stats.decisions;
  }
  const bool ok = hits >= kPacRate * instances && decisions == 0;
  return {ok, ratio(hits, instances) + " within (1+eps); DPLL decision events " + std::to_string(decisions)};
}

// ---------------------------------------------------------------------------

// Satisfiable random 3-CNF whose solution count lies in [lo, hi].
ProblemInstance instance_with_count(std::uint32_t n, std::uint64_t lo, std::uint64_t hi, Rng& rng) {
  while (true) {
    ProblemInstance p = make_instance(brute::random_kcnf(n, n / 2 + rng.below(2 * n), 3, rng));
    const auto c = brute::count_models(p.formula);
    if (c >= lo && c <= hi) return p;
  }
}

double js_distance_to_uniform(const std::map<std::uint64_t, std::uint64_t>& counts, std::size_t support,
                              std::uint64_t total) {
  // Base-2 Jensen-Shannon divergence, square-rooted.
  const double q = 1.0 / static_cast<double>(support);
  double js = 0;
  std::size_t seen = 0;
  for (const auto& [w, c] : counts) {
    ++seen;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    const double m = (p + q) / 2;
    js += 0.5 * p * std::log2(p / m) + 0.5 * q * std::log2(q / m);
  }
  js += 0.5 * q * static_cast<double>(support - seen);  // p = 0 terms: q log2(q / (q/2))
  return std::sqrt(std::max(0.0, js));
}

Outcome uniformity_run(const ProblemInstance& p, std::uint32_t workers, std::uint64_t seed, std::size_t r_size) {
  const std::size_t n = 100000;
  const ParallelResult res =
      unigen2_parallel(p, 16, n, workers, seed, 10, [] { return std::make_unique<BuiltinOracle>(); });
  Checker ck;
  ck.require(!res.setup.exhaustive.has_value(), "exhaustive path fired");
  std::uint64_t calls = res.failed_calls;
  for (auto c : res.calls_per_worker) calls += c;
  std::map<std::uint64_t, std::uint64_t> counts;
  for (const auto& s : res.samples) {
    ck.require(satisfies(p.formula, s.model), "sample violates F");
    ++counts[brute::mask_of(s.projection)];
  }
  const double lo = res.setup.lo_thresh, eps = 16, r = static_cast<double>(r_size);
  const double l = lo / ((1 + eps) * r), u = std::min(1.0, 1.02 * (1 + eps) * lo / r);
  const double c = static_cast<double>(calls);
  const double low = c * l - kSigmas * sigma(c, l), high = c * u + kSigmas * sigma(c, u);
  std::uint64_t fmin = UINT64_MAX, fmax = 0;
  for (const auto& [w, k] : counts) {
    fmin = std::min(fmin, k);
    fmax = std::max(fmax, k);
  }
  if (counts.size() < r_size) fmin = 0;
  ck.require(fmin >= low && fmax <= high, "frequency outside [" + fmt(low) + ", " + fmt(high) + "]");
  const double js = js_distance_to_uniform(counts, r_size, res.samples.size());
  ck.require(js < kJsLimit, "JS distance " + fmt(js));
  return {ck.ok, std::to_string(workers) + " worker(s): " + std::to_string(res.samples.size()) + " samples, " +
                     std::to_string(calls) + " calls, freq [" + std::to_string(fmin) + ", " + std::to_string(fmax) +
                     "] in [" + fmt(low, 5) + ", " + fmt(high, 5) + "], JS " + fmt(js, 3) + ck.failures()};
}

Outcome criterion7() {
  Rng rng(7007);
  const ProblemInstance p = instance_with_count(10, 100, 200, rng);
  const std::size_t r = brute::count_models(p.formula);
  const Outcome one = uniformity_run(p, 1, 71, r);
  const Outcome four = uniformity_run(p, 4, 72, r);
  return {one.pass && four.pass, "|R| = " + std::to_string(r) + "; " + one.detail + "; " + four.detail};
}

// ---------------------------------------------------------------------------

Outcome criterion8() {
  Rng rng(8008);
  BuiltinOracle o;
  const int calls = 1000;
  Checker ck;

  const ProblemInstance big = instance_with_count(14, 2000, 6000, rng);
  const auto setup = unigen2_setup(big, 16, 81, o);
  ck.require(setup.has_value() && !setup->exhaustive, "unigen2 setup");
  int ok2 = 0;
  if (setup) {
    Unigen2Sampler sampler(big, *setup, o, Rng(82));
    for (int i = 0; i < calls; ++i) ok2 += !sampler.generate().failed;
  }

  const UnigenSetup us = unigen_prepare(big, 16, 83, o);
  ck.require(!us.exhaustive, "unigen exhaustive path fired");
  Rng r1(84);
  int ok1 = 0;
  for (int i = 0; i < calls; ++i) ok1 += !unigen_draw(big, us, r1, o).failed;

  ProblemInstance w = big;
  w.weights.set(1, Rational(3, 4));
  w.weights.set(2, Rational(1, 4));
  const WeightgenSetup ws = weightgen_prepare(w, 16, exact_tilt(w, o), 85, o);
  ck.require(!ws.exhaustive, "weightgen exhaustive path fired");
  Rng r3(86);
  int ok3 = 0;
  for (int i = 0; i < calls; ++i) ok3 += !weightgen_draw(w, ws, r3, o).failed;

  ck.require(ok2 >= kSuccessFloor * calls, "unigen2 rate");
  ck.require(ok1 >= kSuccessFloor * calls, "unigen rate");
  ck.require(ok3 >= kSuccessFloor * calls, "weightgen rate");
  return {ck.ok, "success over " + std::to_string(calls) + " calls: unigen2 " + fmt(ok2 / 1000.0) + ", unigen " +
                     fmt(ok1 / 1000.0) + ", weightgen " + fmt(ok3 / 1000.0) + " (|R| = " +
                     std::to_string(brute::count_models(big.formula)) + ")" + ck.failures()};
}

// ---------------------------------------------------------------------------

Outcome criterion9() {
  Rng rng(9009);
  BuiltinOracle o;
  const int runs = 50;
  int hits = 0;
  std::size_t worst_excess = 0;
  bool bound_ok = true;
  for (int i = 0; i < runs; ++i) {
    ProblemInstance p;
    Rational exact;
    do {
      const auto n = 10 + static_cast<std::uint32_t>(rng.below(5));
      p = make_instance(brute::random_kcnf(n, n / 2 + rng.below(n), 3, rng));
      for (Var v = 1; v <= 3; ++v) p.weights.set(v, random_dyadic(rng, 2));
      exact = brute::weighted_count(p);
    } while (exact == 0);
    const Rational r = exact_tilt(p, o);
    const WeightCountResult res = weightmc(p, kEps, kDelta, r, 900 + i, o);
    hits += in_pac_range(res.estimate, exact);
    // floor(r * pivot) + 1 models per BoundedWeightSAT call.
    const Rational cap = r * res.params.pivot;
    const BigInt bound = BigInt(cap.get_num() / cap.get_den()) + 1;
    if (BigInt(static_cast<unsigned long>(res.diagnostics.max_models_per_call)) > bound) bound_ok = false;
    worst_excess = std::max(worst_excess, res.diagnostics.max_models_per_call);
  }
  const bool ok = hits >= kPacRate * runs && bound_ok;
  return {ok, ratio(hits, runs) + " within (1+eps); per-call model bound " + (bound_ok ? "held" : "violated") +
                  " (max " + std::to_string(worst_excess) + " models in one call)"};
}

// ---------------------------------------------------------------------------

template <class Draw>
std::vector<Solution> draw_many(std::size_t n, Draw&& draw) {
  std::vector<Solution> out;
  while (out.size() < n) {
    SampleBatch b = draw();
    if (!b.failed)
      for (auto& s : b.samples) out.push_back(std::move(s));
  }
  return out;
}

Outcome criterion10() {
  BuiltinOracle o;
  Checker ck;
  const std::size_t n = 100000;

  // Unit clause x2 with x1 free and W(x1) = 3/4: two models weighing 3:1.
  ProblemInstance two = make_instance(CnfFormula{2, {{Lit(2, false)}}, {}});
  two.weights.set(1, Rational(3, 4));
  const WeightgenSetup s2 = weightgen_prepare(two, 16, Rational(3), 101, o);
  Rng r2(102);
  const auto samples = draw_many(n, [&] { return weightgen_draw(two, s2, r2, o); });
  std::size_t heavy = 0;
  for (const auto& s : samples) heavy += s.model.get(1);
  const double dev = std::abs(static_cast<double>(heavy) - 0.75 * n);
  ck.require(dev <= kSigmas * sigma(n, 0.75), "3:1 split off by " + fmt(dev));

  // 16 models: x5 = x1 xor x2 over five variables, four weighted.
  ProblemInstance sixteen = make_instance(CnfFormula{5, {}, {make_xor({1, 2, 5}, false)}});
  sixteen.weights.set(1, Rational(1, 4));
  sixteen.weights.set(2, Rational(3, 4));
  sixteen.weights.set(3, Rational(3, 8));
  sixteen.weights.set(5, Rational(5, 8));
  const Rational total = brute::weighted_count(sixteen);
  const WeightgenSetup s16 = weightgen_prepare(sixteen, 16, exact_tilt(sixteen, o), 103, o);
  Rng r16(104);
  const auto draws = draw_many(n, [&] { return weightgen_draw(sixteen, s16, r16, o); });
  std::map<std::uint64_t, std::uint64_t> counts;
  for (const auto& s : draws) ++counts[brute::mask_of(s.projection)];
  double chi = 0;
  std::size_t models = 0;
  brute::for_each_model(brute::compile(sixteen.formula), [&](std::uint64_t x) {
    ++models;
    const Assignment a = brute::to_assignment(x, 5);
    const double expect = Rational(assignment_weight(sixteen.weights, a) / total).get_d() * n;
    const double got = static_cast<double>(counts[brute::project_mask(x, sixteen.sampling)]);
    chi += (got - expect) * (got - expect) / expect;
  });
  ck.require(models == 16, "instance has " + std::to_string(models) + " models");
  const boost::math::chi_squared dist(static_cast<double>(models - 1));
  const double pvalue = boost::math::cdf(boost::math::complement(dist, chi));
  ck.require(pvalue > kChiSquareP, "chi-square p " + fmt(pvalue));
  return {ck.ok, "3:1 instance " + fmt(100.0 * heavy / n, 4) + "% heavy (4 sigma = " +
                     fmt(100 * kSigmas * sigma(n, 0.75) / n, 3) + "%); 16-model chi-square p = " + fmt(pvalue, 3) +
                     ck.failures()};
}

// ---------------------------------------------------------------------------

CnfFormula random_circuit(std::uint32_t inputs, std::uint32_t gates, bool constrain, Rng& rng) {
  CnfFormula f;
  f.num_vars = inputs + gates;
  for (Var g = inputs + 1; g <= inputs + gates; ++g) {
    const Var a = static_cast<Var>(1 + rng.below(g - 1));
    Var b = static_cast<Var>(1 + rng.below(g - 1));
    if (b == a) b = a == 1 ? 2 : a - 1;
    const Lit la(a, rng.bit()), lb(b, rng.bit());
    const Lit out(g, false);
    switch (rng.below(3)) {
      case 0:
        f.clauses.push_back({~out, la});
        f.clauses.push_back({~out, lb});
        f.clauses.push_back({out, ~la, ~lb});
        break;
      case 1:
        f.clauses.push_back({out, ~la});
        f.clauses.push_back({out, ~lb});
        f.clauses.push_back({~out, la, lb});
        break;
      default:
        f.clauses.push_back({~out, la, lb});
        f.clauses.push_back({~out, ~la, ~lb});
        f.clauses.push_back({out, ~la, lb});
        f.clauses.push_back({out, la, ~lb});
        break;
    }
  }
  if (constrain) f.clauses.push_back({Lit(inputs + gates, false)});
  return f;
}

Outcome criterion11() {
  BuiltinOracle o;
  Checker ck;
  const CnfFormula equiv{2, {{Lit(1, false), Lit(2, true)}, {Lit(1, true), Lit(2, false)}}, {}};
  const auto e = mis(equiv, {}, std::nullopt, MisOptions{}, o);
  ck.require(e.result.size() == 1, "equivalence gave size " + std::to_string(e.result.size()));

  Rng rng(1111);
  int done = 0;
  std::size_t total_size = 0, total_vars = 0;
  while (done < 100) {
    const auto inputs = 3 + static_cast<std::uint32_t>(rng.below(5));
    const auto gates = 2 + static_cast<std::uint32_t>(rng.below(14 - inputs - 1));
    const CnfFormula f = random_circuit(inputs, gates, rng.below(3) == 0, rng);
    const ProblemInstance all = make_instance(f);
    const std::uint64_t total = brute::count_models(f);
    if (total == 0) continue;
    MisOptions opts;
    opts.seed = 1100 + done;
    const auto s = mis(f, {}, std::nullopt, opts, o);
    const std::string tag = "formula " + std::to_string(done);
    ck.require(s.minimal, tag + " not minimal");
    ck.require(is_independent_support(f, s.result, o), tag + " Q satisfiable");
    ck.require(brute::projected_models(f, s.result).size() == total, tag + " model pairs agree on I");
    for (Var x : s.result) {
      std::vector<Var> less;
      for (Var y : s.result)
        if (y != x) less.push_back(y);
      ck.require(!is_independent_support(f, less, o), tag + " drop " + std::to_string(x) + " still a support");
    }
    ProblemInstance on_i = all;
    on_i.sampling = s.result;
    ck.require(brute::projected_count(on_i) == brute::projected_count(all), tag + " counts differ");
    total_size += s.result.size();
    total_vars += f.num_vars;
    ++done;
  }
  return {ck.ok, "equivalence -> size " + std::to_string(e.result.size()) + "; 100 circuits: sound, minimal, counts equal; " +
                     "mean |I|/n " + fmt(static_cast<double>(total_size) / total_vars, 3) + ck.failures()};
}

// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, ReliabilityGraph>> graph_library() {
  std::vector<std::pair<std::string, ReliabilityGraph>> lib;
  auto add = [&](const std::string& name, const std::string& text, bool directed = false) {
    lib.emplace_back(name + (directed ? " (directed)" : ""), parse_graph(text, directed));
  };
  for (int len = 1; len <= 6; ++len) {
    std::string t = "p graph " + std::to_string(len + 1) + " " + std::to_string(len) + "\n";
    // Path 1 - 3 - 4 - ... - 2.
    std::vector<int> order{1};
    for (int i = 3; i <= len + 1; ++i) order.push_back(i);
    order.push_back(2);
    for (int i = 0; i < len; ++i) t += "e " + std::to_string(order[i]) + " " + std::to_string(order[i + 1]) + "\n";
    add("series-" + std::to_string(len), t);
  }
  for (int k = 1; k <= 6; ++k) {
    std::string t = "p graph 2 " + std::to_string(k) + "\n";
    for (int i = 0; i < k; ++i) t += "e 1 2\n";
    add("parallel-" + std::to_string(k), t);
  }
  const std::string diamond = "p graph 4 4\ne 1 3\ne 1 4\ne 3 2\ne 4 2\n";
  const std::string bridge = "p graph 4 5\ne 1 3\ne 1 4\ne 3 2\ne 4 2\ne 3 4\n";
  const std::string k4 = "p graph 4 6\ne 1 2\ne 1 3\ne 1 4\ne 2 3\ne 2 4\ne 3 4\n";
  const std::string grid =
      "p graph 6 7\ne 1 3\ne 3 4\ne 1 5\ne 5 6\ne 6 2\ne 4 2\ne 3 6\n";
  const std::string ladder =
      "p graph 8 10\ne 1 3\ne 3 5\ne 5 7\ne 7 2\ne 1 4\ne 4 6\ne 6 8\ne 8 2\ne 3 4\ne 5 6\n";
  const std::string cycle6 = "p graph 6 6\ne 1 3\ne 3 2\ne 2 4\ne 4 5\ne 5 6\ne 6 1\n";
  const std::string wheel =
      "p graph 6 10\ne 1 3\ne 3 4\ne 4 2\ne 2 5\ne 5 1\ne 6 1\ne 6 2\ne 6 3\ne 6 4\ne 6 5\n";
  const std::string cut = "p graph 4 2\ne 1 3\ne 2 4\n";
  for (bool d : {false, true}) {
    add("diamond", diamond, d);
    add("bridge", bridge, d);
    add("k4", k4, d);
    add("grid", grid, d);
    add("ladder", ladder, d);
    add("cycle6", cycle6, d);
    add("wheel", wheel, d);
  }
  add("disconnected", cut);
  add("weighted-edge-3/8", "p graph 2 1\ne 1 2 3 3\n");
  add("weighted-edge-13/16", "p graph 2 1\ne 1 2 13 4\n");
  add("weighted-series", "p graph 3 2\ne 1 3 3 2\ne 3 2 5 3\n");
  add("weighted-parallel", "p graph 2 3\ne 1 2 1 2\ne 1 2 7 3\ne 1 2 9 4\n");
  add("weighted-diamond", "p graph 4 4\ne 1 3 3 2\ne 1 4 5 3\ne 3 2 1 2\ne 4 2 7 3\n");
  add("weighted-bridge", "p graph 4 5\ne 1 3 3 2\ne 1 4\ne 3 2\ne 4 2 5 3\ne 3 4 11 4\n");
  add("weighted-bridge", "p graph 4 5\ne 1 3 3 2\ne 1 4\ne 3 2\ne 4 2 5 3\ne 3 4 11 4\n", true);
  Rng rng(1212);
  while (lib.size() < 56) {
    ReliabilityGraph g;
    g.num_nodes = 3 + static_cast<std::uint32_t>(rng.below(5));
    g.directed = rng.bit();
    const auto edges = 3 + rng.below(10);
    for (std::uint64_t j = 0; j < edges; ++j) {
      GraphEdge e{static_cast<Node>(1 + rng.below(g.num_nodes)), static_cast<Node>(1 + rng.below(g.num_nodes)), 1, 1};
      if (rng.below(4) == 0) {
        e.m = 1 + static_cast<std::uint32_t>(rng.below(2));
        e.k = static_cast<std::uint32_t>(2 * rng.below(std::uint64_t{1} << (e.m - 1)) + 1);
      }
      g.edges.push_back(e);
    }
    if (g.total_bits() > 14) continue;
    lib.emplace_back("random-" + std::to_string(lib.size()), g);
  }
  return lib;
}

Outcome criterion12() {
  Checker ck;
  BuiltinOracle o;
  const auto lib = graph_library();
  int hits = 0, runs = 0;
  for (std::size_t i = 0; i < lib.size(); ++i) {
    const auto& [name, g] = lib[i];
    // Encoding count: every disconnecting subset of the expanded graph.
    const ReliabilityGraph x = expand_weighted_edges(g);
    const ProblemInstance enc = encode_disconnection(x, 1, 2);
    OracleQuery q = make_query(enc, (std::size_t{1} << x.edges.size()) + 1);
    const std::size_t encoded = o.bounded_sat(q).size();
    ReliabilityGraph half = x;
    for (auto& e : half.edges) e.k = e.m = 1;
    BigInt all = 1;
    all <<= static_cast<mp_bitcnt_t>(x.edges.size());
    const Rational disconnecting = brute_force_unreliability(half, 1, 2) * Rational(all);
    ck.require(Rational(static_cast<unsigned long>(encoded)) == disconnecting, name + ": encoding count");
    const Rational r = brute_force_unreliability(g, 1, 2);
    BigInt den = 1;
    den <<= g.total_bits();
    ck.require(Rational(static_cast<unsigned long>(encoded)) / Rational(den) == r, name + ": gadget probability");

    for (std::uint64_t seed : {1200 + 2 * i, 1201 + 2 * i}) {
      const ReliabilityEstimate est = estimate_unreliability(g, 1, 2, kEps, kDelta, seed, o);
      hits += in_pac_range(est.r, r);
      ++runs;
    }
  }
  ck.require(hits >= kPacRate * runs, "pipeline rate " + ratio(hits, runs));
  return {ck.ok, std::to_string(lib.size()) + " graphs: encoding counts match brute force; pipeline " +
                     ratio(hits, runs) + " within (1+eps)" + ck.failures()};
}

// ---------------------------------------------------------------------------

Outcome criterion13() {
  Checker ck;
  Rng rng(1313);
  for (std::uint32_t n = 1; n <= 8; ++n) {
    for (int rep = 0; rep < 4; ++rep) {
      auto h = std::make_shared<const XorHash>(draw_hash(n, n, rng));
      for (std::uint64_t y = 0; y < (std::uint64_t{1} << n); ++y) {
        const BitVec yb = brute::projection_bits(y, n);
        const auto full = eval(prefix(h, n), yb);
        for (std::uint32_t m = 0; m <= n; ++m) {
          const auto part = eval(prefix(h, m), yb);
          bool member = true;
          for (std::uint32_t i = 0; i < m; ++i) {
            ck.require(part.image.get(i) == full.image.get(i), "prefix image n=" + std::to_string(n));
            member = member && full.image.get(i) == h->target.get(i);
          }
          ck.require(part.member == member, "prefix membership n=" + std::to_string(n));
        }
      }
    }
  }

  // Pr[h(y) = alpha] = 2^-m and Pr[h(y1) = h(y2) = alpha] = 2^-2m.
  const int draws = 100000;
  const std::uint32_t n = 6, m = 2;
  const std::vector<std::uint64_t> ys{0, 1, 0b101010, 0b111111};
  std::vector<int> single(ys.size(), 0);
  std::map<std::pair<std::size_t, std::size_t>, int> pair;
  std::vector<int> ones(m, 0);
  for (int d = 0; d < draws; ++d) {
    auto h = std::make_shared<const XorHash>(draw_hash(n, m, rng));
    const CellId c = prefix(h, m);
    std::vector<bool> in(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const auto img = eval(c, brute::projection_bits(ys[i], n));
      in[i] = img.member;
      single[i] += in[i];
      if (i == 2)
        for (std::uint32_t b = 0; b < m; ++b) ones[b] += img.image.get(b);
    }
    for (std::size_t i = 0; i < ys.size(); ++i)
      for (std::size_t j = i + 1; j < ys.size(); ++j) pair[{i, j}] += in[i] && in[j];
  }
  const double p1 = 1.0 / (1 << m), p2 = p1 * p1;
  double worst = 0;
  for (int s : single) {
    const double z = std::abs(s - draws * p1) / sigma(draws, p1);
    worst = std::max(worst, z);
  }
  for (const auto& [ij, s] : pair) {
    const double z = std::abs(s - draws * p2) / sigma(draws, p2);
    worst = std::max(worst, z);
  }
  for (int s : ones) worst = std::max(worst, std::abs(s - draws * 0.5) / sigma(draws, 0.5));
  ck.require(worst <= kSigmas, "deviation " + fmt(worst) + " sigma");
  return {ck.ok, "prefix consistency exhaustive for n <= 8; 1-/2-wise over 1e5 draws, worst deviation " +
                     fmt(worst, 3) + " sigma" + ck.failures()};
}

// ---------------------------------------------------------------------------

std::set<std::uint64_t> masks(const SolutionSet& y) {
  std::set<std::uint64_t> out;
  for (const auto& s : y.solutions) out.insert(brute::mask_of(s.projection));
  return out;
}

std::optional<SolverCommand> system_solver() {
  if (const char* env = std::getenv("CELLCOUNT_SOLVER")) {
    auto cmd = parse_solver_spec(env);
    if (cmd) return cmd;
  }
  for (const auto& [bin, xor_native] :
       std::vector<std::pair<std::string, bool>>{{"cryptominisat5", true}, {"kissat", false}, {"cadical", false}}) {
    if (std::system(("command -v " + bin + " >/dev/null 2>&1").c_str()) == 0) {
      SolverCommand cmd;
      cmd.command_template = bin + " {input}";
      cmd.native_xor = xor_native;
      return cmd;
    }
  }
  return std::nullopt;
}

Outcome criterion14() {
  Checker ck;
  Rng rng(1414);
  BuiltinOracle builtin;
  DnfOracle dnf;
  SolverCommand ref;
  ref.command_template = std::string(REFERENCE_SOLVER_PATH) + " {input}";
  ExternalOracle external(ref);
  const auto sys = system_solver();
  std::optional<ExternalOracle> installed;
  if (sys) installed.emplace(*sys);

  for (int i = 0; i < 100; ++i) {
    const auto n = 4 + static_cast<std::uint32_t>(rng.below(5));
    SamplingSet s;
    for (Var v = 1; v <= n; ++v)
      if (rng.below(3) != 0) s.push_back(v);
    if (s.empty()) s.push_back(1);
    const std::vector<XorClause> xs{brute::random_xor(n, rng, 0.6)};
    const std::size_t limit = (std::size_t{1} << s.size()) + 1;
    const std::string tag = "instance " + std::to_string(i);
    if (i % 2 == 0) {
      ProblemInstance p = make_instance(brute::random_kcnf(n, n, 3, rng));
      p.sampling = s;
      OracleQuery q = make_query(p, limit);
      q.extra_xors = xs;
      const auto want = brute::projected_models(p.formula, s, xs);
      const auto a = masks(builtin.bounded_sat(q));
      ck.require(a == want, tag + " builtin");
      ck.require(masks(external.bounded_sat(q)) == a, tag + " external");
      if (installed) ck.require(masks(installed->bounded_sat(q)) == a, tag + " installed solver");
    } else {
      // DNF enumerator on the DNF; CNF backends on its definitional encoding.
      const DnfFormula d = brute::random_dnf(n, 1 + rng.below(4), 1 + static_cast<std::uint32_t>(rng.below(3)), rng);
      ProblemInstance p = make_instance(d);
      p.sampling = s;
      OracleQuery q = make_query(p, limit);
      q.extra_xors = xs;
      const auto a = masks(dnf.bounded_sat(q));
      ProblemInstance c = make_instance(tseitin(to_expr(Formula(d)), n));
      c.sampling = s;
      OracleQuery qc = make_query(c, limit);
      qc.extra_xors = xs;
      ck.require(a == brute::projected_models(d, s, xs), tag + " dnf enumerator");
      ck.require(masks(builtin.bounded_sat(qc)) == a, tag + " builtin on encoding");
      ck.require(masks(external.bounded_sat(qc)) == a, tag + " external on encoding");
      if (installed) ck.require(masks(installed->bounded_sat(qc)) == a, tag + " installed solver");
    }
  }
  std::string extra = installed ? "installed solver '" + sys->command_template + "' included"
                                : "no installed solver found, that leg skipped";
  return {ck.ok, "100 instances: builtin, external (bundled DIMACS solver) and DNF enumerator agree; " + extra +
                     ck.failures()};
}

const std::vector<std::pair<const char*, Outcome (*)()>> kCriteria{
    {"chain-formula law", criterion1},
    {"reduction identities", criterion2},
    {"parameter derivations", criterion3},
    {"ApproxMC2 PAC", criterion4},
    {"LogSATSearch equivalence", criterion5},
    {"DNF FPRAS", criterion6},
    {"sampler uniformity", criterion7},
    {"sampler success rates", criterion8},
    {"WeightMC PAC", criterion9},
    {"WeightGen weighted uniformity", criterion10},
    {"MIS", criterion11},
    {"RelNet", criterion12},
    {"hash family", criterion13},
    {"oracle backends", criterion14},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
    } else {
      std::cerr << "usage: acceptance [--criterion N]...\n";
      return 2;
    }
  }
  if (selected.empty())
    for (int c = 1; c <= static_cast<int>(kCriteria.size()); ++c) selected.push_back(c);
  bool all = true;
  for (int c : selected) {
    if (c < 1 || c > static_cast<int>(kCriteria.size())) {
      std::cerr << "no criterion " << c << '\n';
      return 2;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = kCriteria[c - 1].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c, kCriteria[c - 1].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
