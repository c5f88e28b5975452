// SPDX-License-Identifier: MIT
#include "cellcount/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "cellcount/chain.hpp"
#include "cellcount/counting.hpp"
#include "cellcount/indsupport.hpp"
#include "cellcount/relnet.hpp"
#include "cellcount/sampling.hpp"
#include "cellcount/weighted.hpp"

namespace cellcount {

namespace {

using nlohmann::json;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Seed stream reserved for --mis-first so it never collides with the
// streams the counters and samplers derive from the same seed.
constexpr std::uint64_t kMisStream = 0x6d6973;

struct Common {
  std::string input = "-";
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string solver;
  bool json = false;
  bool verbose = false;
};

std::string read_input(const std::string& path) {
  std::ostringstream ss;
  if (path == "-") {
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed_given) return c.seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

OracleFactory factory_for(const Common& c) {
  std::string spec = c.solver;
  if (spec.empty())
    if (const char* env = std::getenv("CELLCOUNT_SOLVER")) spec = env;
  const std::optional<SolverCommand> cmd = parse_solver_spec(spec);
  return [cmd]() -> std::unique_ptr<Oracle> {
    if (cmd) return std::make_unique<ExternalOracle>(*cmd);
    return std::make_unique<BuiltinOracle>();
  };
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

// Exact when the expansion terminates within a readable length.
std::string decimal(const Rational& q) {
  try {
    std::string s = exact_decimal(q);
    if (s.size() <= 48) return s;
  } catch (const std::invalid_argument&) {
  }
  mpf_class f(q, 256);
  char buf[96];
  gmp_snprintf(buf, sizeof buf, "%.17Fg", f.get_mpf_t());
  return buf;
}

Rational parse_rational(const std::string& s, const char* what) {
  if (s.find('/') != std::string::npos) {
    Rational q;
    if (q.set_str(s, 10) != 0 || q.get_den() == 0) throw UsageError(std::string("invalid ") + what + " '" + s + "'");
    q.canonicalize();
    return q;
  }
  if (auto q = parse_decimal(s)) return *q;
  throw UsageError(std::string("invalid ") + what + " '" + s + "'");
}

std::vector<long long> witness_lits(const SamplingSet& s, const BitVec& projection) {
  std::vector<long long> lits;
  lits.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    lits.push_back(projection.get(i) ? static_cast<long long>(s[i]) : -static_cast<long long>(s[i]));
  return lits;
}

void print(std::ostream& out, const Common& c, const json& j, const std::vector<std::string>& text) {
  if (c.json) {
    out << j.dump() << '\n';
  } else {
    for (const auto& line : text) out << line << '\n';
  }
}

void report_calls(std::ostream& err, const Common& c, const Oracle& o) {
  if (c.verbose)
    err << "c oracle " << o.name() << " queries " << o.stats().queries << " sat_calls " << o.stats().sat_calls << '\n';
}

// S := I when S is an independent support; otherwise S is kept, since a
// smaller set would change the projected count.
void apply_mis_first(ProblemInstance& inst, std::uint64_t seed, Oracle& o, json& warnings, std::ostream& err) {
  const auto* cnf = std::get_if<CnfFormula>(&inst.formula);
  if (!cnf) throw InputError("--mis-first needs CNF input");
  MisOptions opts;
  opts.seed = Rng::derive(seed, kMisStream);
  opts.repair = false;
  try {
    inst.sampling = mis(*cnf, {}, inst.sampling, opts, o).result;
  } catch (const NotASupport&) {
    const std::string w = "sampling set is not an independent support; --mis-first skipped";
    warnings.push_back(w);
    err << "c warning: " << w << '\n';
  }
}

void warn_if_not_support(const ProblemInstance& inst, Oracle& o, json& warnings, std::ostream& err) {
  const auto* cnf = std::get_if<CnfFormula>(&inst.formula);
  if (!cnf || inst.sampling == all_vars(cnf->num_vars)) return;
  if (is_independent_support(*cnf, inst.sampling, o)) return;
  const std::string w = "sampling set is not an independent support; witnesses are projections";
  warnings.push_back(w);
  err << "c warning: " << w << '\n';
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("input", c.input, "Input file, '-' for stdin");
  sub->add_option("--seed", c.seed, "Random seed (default: fresh entropy, echoed)")->each([&c](const std::string&) {
    c.seed_given = true;
  });
  sub->add_option("--solver", c.solver, "Oracle backend: 'builtin' or a command template (overrides CELLCOUNT_SOLVER)");
  sub->add_flag("--json", c.json, "Emit one JSON object instead of text");
  sub->add_flag("-v,--verbose", c.verbose, "Report oracle call counters on stderr");
}

// count -----------------------------------------------------------------

struct CountArgs {
  Common c;
  double epsilon = 0.8, delta = 0.2;
  bool mis_first = false;
};

int run_count(const CountArgs& a, std::ostream& out, std::ostream& err) {
  ProblemInstance inst = parse_dimacs(read_input(a.c.input));
  const std::uint64_t seed = resolve_seed(a.c);
  auto oracle = factory_for(a.c)();
  json warnings = json::array();
  if (a.mis_first) apply_mis_first(inst, seed, *oracle, warnings, err);
  const CountResult r =
      is_dnf(inst.formula) ? approx_dnf_count(inst, a.epsilon, a.delta, seed) : approxmc2(inst, a.epsilon, a.delta, seed, *oracle);
  const std::string estimate = r.count.value().get_str();
  json j{{"command", "count"},
         {"seed", seed},
         {"epsilon", a.epsilon},
         {"delta", a.delta},
         {"thresh", static_cast<double>(r.params.thresh)},
         {"t", r.params.t},
         {"oracle", r.oracle},
         {"sampling_set_size", inst.sampling.size()},
         {"estimate", estimate},
         {"significand", r.count.significand.get_str()},
         {"exponent2", r.count.exponent2},
         {"exact", r.count.exact},
         {"sat_calls", r.stats.sat_calls},
         {"cores", r.stats.cores},
         {"failed_cores", r.stats.failed_cores},
         {"warnings", warnings}};
  print(out, a.c, j,
        {"c seed " + std::to_string(seed),
         "c epsilon " + fmt(a.epsilon) + " delta " + fmt(a.delta) + " thresh " +
             fmt(static_cast<double>(r.params.thresh)) + " t " + std::to_string(r.params.t),
         "c oracle " + r.oracle, "c sampling-set-size " + std::to_string(inst.sampling.size()),
         "c estimate " + r.count.significand.get_str() + " * 2^" + std::to_string(r.count.exponent2) +
             (r.count.exact ? " exact" : ""),
         "c sat-calls " + std::to_string(r.stats.sat_calls) + " cores " + std::to_string(r.stats.cores) + " failed " +
             std::to_string(r.stats.failed_cores),
         "s mc " + estimate});
  report_calls(err, a.c, *oracle);
  return kExitOk;
}

// wcount ----------------------------------------------------------------

struct WcountArgs {
  Common c;
  double epsilon = 0.8, delta = 0.2;
  std::string tilt;
  std::string method = "weightmc";
};

Rational resolve_tilt(const std::string& tilt, const ProblemInstance& inst, Oracle& o) {
  if (tilt == "auto") return exact_tilt(inst, o);
  const Rational r = parse_rational(tilt, "tilt");
  if (r < 1) throw UsageError("tilt bound must be at least 1");
  return r;
}

int run_wcount(const WcountArgs& a, std::ostream& out, std::ostream& err) {
  ProblemInstance inst = parse_dimacs(read_input(a.c.input));
  const std::uint64_t seed = resolve_seed(a.c);
  auto oracle = factory_for(a.c)();
  json j{{"command", "wcount"}, {"seed", seed}, {"epsilon", a.epsilon}, {"delta", a.delta}, {"method", a.method}};
  std::vector<std::string> text{"c seed " + std::to_string(seed), "c method " + a.method};
  Rational estimate;
  bool exact = false;
  if (a.method == "weightmc") {
    if (a.tilt.empty()) throw UsageError("weightmc needs --tilt <r> or --tilt auto");
    const Rational r = resolve_tilt(a.tilt, inst, *oracle);
    const WeightCountResult w = weightmc(inst, a.epsilon, a.delta, r, seed, *oracle);
    estimate = w.estimate;
    exact = w.exact;
    j["tilt"] = r.get_str();
    j["pivot"] = w.params.pivot;
    j["t"] = w.params.t;
    j["w_max"] = w.w_max.get_str();
    j["sat_calls"] = w.sat_calls;
    j["cores"] = w.cores;
    j["failed_cores"] = w.failed_cores;
    j["tilt_violation"] = w.diagnostics.tilt_violation;
    j["oracle"] = w.oracle;
    text.push_back("c epsilon " + fmt(a.epsilon) + " delta " + fmt(a.delta) + " tilt " + r.get_str() + " pivot " +
                   std::to_string(w.params.pivot) + " t " + std::to_string(w.params.t));
    text.push_back("c oracle " + w.oracle);
    text.push_back("c sat-calls " + std::to_string(w.sat_calls) + " cores " + std::to_string(w.cores) + " failed " +
                   std::to_string(w.failed_cores));
    if (w.diagnostics.tilt_violation) {
      err << "c warning: observed model weights exceed the supplied tilt bound\n";
      text.push_back("c warning tilt-violation");
    }
  } else if (a.method == "chain") {
    const Reduction red = reduce_wmc_conjunctive(inst);
    const CountResult cr = approxmc2(red.instance, a.epsilon, a.delta, seed, *oracle);
    estimate = red.weight_from_count(cr.count.value());
    exact = cr.count.exact;
    j["m_hat"] = red.plan.m_hat;
    j["c_f"] = red.plan.c_f.get_str();
    j["thresh"] = static_cast<double>(cr.params.thresh);
    j["t"] = cr.params.t;
    j["sat_calls"] = cr.stats.sat_calls;
    j["cores"] = cr.stats.cores;
    j["failed_cores"] = cr.stats.failed_cores;
    j["oracle"] = cr.oracle;
    text.push_back("c epsilon " + fmt(a.epsilon) + " delta " + fmt(a.delta) + " thresh " +
                   fmt(static_cast<double>(cr.params.thresh)) + " t " + std::to_string(cr.params.t));
    text.push_back("c C_F 2^-" + std::to_string(red.plan.m_hat));
    text.push_back("c oracle " + cr.oracle);
    text.push_back("c sat-calls " + std::to_string(cr.stats.sat_calls) + " cores " + std::to_string(cr.stats.cores) +
                   " failed " + std::to_string(cr.stats.failed_cores));
  } else {
    throw UsageError("unknown method '" + a.method + "'");
  }
  j["estimate"] = estimate.get_str();
  j["decimal"] = decimal(estimate);
  j["exact"] = exact;
  if (exact) text.push_back("c exact");
  text.push_back("s wmc " + estimate.get_str());
  text.push_back("s wmc-decimal " + decimal(estimate));
  print(out, a.c, j, text);
  report_calls(err, a.c, *oracle);
  return kExitOk;
}

// sample / wsample --------------------------------------------------------

struct SampleArgs {
  Common c;
  std::string variant = "unigen2";
  double epsilon = 16;
  std::size_t n = 10;
  bool freq = false;
  std::uint32_t threads = 1;
  std::uint32_t max_retries = 10;
  bool mis_first = false;
  std::string tilt;  // wsample only
};

// One batch per draw; a failed draw is retried on the same stream, which
// has advanced, up to max_retries times.
template <class Draw>
std::vector<Solution> draw_until(std::size_t n, std::uint32_t max_retries, Draw&& draw, std::uint64_t& failed) {
  std::vector<Solution> out;
  while (out.size() < n) {
    std::uint32_t attempt = 0;
    while (true) {
      SampleBatch b = draw();
      if (!b.failed) {
        for (auto& s : b.samples) out.push_back(std::move(s));
        break;
      }
      ++failed;
      if (++attempt > max_retries)
        throw RetryCapExceeded("draw failed " + std::to_string(attempt) + " times in a row");
    }
  }
  out.resize(std::min(out.size(), n));
  return out;
}

void emit_samples(std::ostream& out, const SampleArgs& a, json j, std::vector<std::string> text,
                  const SamplingSet& s, const std::vector<Solution>& samples) {
  if (a.freq) {
    std::map<std::vector<long long>, std::uint64_t> counts;
    for (const auto& x : samples) ++counts[witness_lits(s, x.projection)];
    json rows = json::array();
    for (const auto& [w, k] : counts) {
      rows.push_back({{"witness", w}, {"count", k}});
      std::string line;
      for (long long l : w) line += std::to_string(l) + ' ';
      text.push_back(line + "0 " + std::to_string(k));
    }
    j["freq"] = rows;
  } else {
    json rows = json::array();
    for (const auto& x : samples) {
      rows.push_back(witness_lits(s, x.projection));
      text.push_back(sample_line(s, x.projection));
    }
    j["samples"] = rows;
  }
  print(out, a.c, j, text);
}

int run_sample(const SampleArgs& a, std::ostream& out, std::ostream& err) {
  ProblemInstance inst = parse_dimacs(read_input(a.c.input));
  const std::uint64_t seed = resolve_seed(a.c);
  const OracleFactory factory = factory_for(a.c);
  auto oracle = factory();
  json warnings = json::array();
  if (a.mis_first) apply_mis_first(inst, seed, *oracle, warnings, err);
  if (!a.mis_first) warn_if_not_support(inst, *oracle, warnings, err);

  json j{{"command", "sample"}, {"variant", a.variant}, {"seed", seed}, {"epsilon", a.epsilon}, {"n", a.n}};
  std::vector<std::string> text{"c seed " + std::to_string(seed), "c variant " + a.variant};
  std::vector<Solution> samples;
  std::uint64_t failed = 0;
  auto describe = [&](const SampleParams& p) {
    j["kappa"] = p.kappa;
    j["pivot"] = p.pivot;
    j["hi_thresh"] = p.hi_thresh;
    j["lo_thresh"] = p.lo_thresh;
    text.push_back("c epsilon " + fmt(a.epsilon) + " kappa " + fmt(p.kappa) + " pivot " + std::to_string(p.pivot) +
                   " hi-thresh " + fmt(p.hi_thresh) + " lo-thresh " + fmt(p.lo_thresh));
  };
  if (a.variant == "unigen2") {
    const ParallelResult r = unigen2_parallel(inst, a.epsilon, a.n, a.threads, seed, a.max_retries, factory);
    describe(r.setup.params);
    j["thresh"] = r.setup.thresh;
    j["lo_thresh"] = r.setup.lo_thresh;
    j["hash_bits"] = r.setup.hash_bits;
    j["exhaustive"] = r.setup.exhaustive.has_value();
    j["threads"] = a.threads;
    std::uint64_t calls = 0;
    for (auto k : r.calls_per_worker) calls += k;
    j["generate_calls"] = calls;
    text.push_back("c thresh " + std::to_string(r.setup.thresh) + " lo-thresh " + std::to_string(r.setup.lo_thresh) +
                   " hash-bits " + std::to_string(r.setup.hash_bits) + (r.setup.exhaustive ? " exhaustive" : ""));
    text.push_back("c generate-calls " + std::to_string(calls) + " threads " + std::to_string(a.threads));
    failed = r.failed_calls;
    samples = r.samples;
    if (samples.size() > a.n) samples.resize(a.n);
  } else if (a.variant == "unigen") {
    const UnigenSetup setup = unigen_prepare(inst, a.epsilon, seed, *oracle);
    describe(setup.params);
    j["q"] = setup.q;
    j["exhaustive"] = setup.exhaustive.has_value();
    text.push_back("c q " + std::to_string(setup.q) + (setup.exhaustive ? " exhaustive" : ""));
    Rng rng = Rng(seed).child(1);
    samples = draw_until(a.n, a.max_retries, [&] { return unigen_draw(inst, setup, rng, *oracle); }, failed);
  } else {
    throw UsageError("unknown variant '" + a.variant + "'");
  }
  j["failed_calls"] = failed;
  j["warnings"] = warnings;
  text.push_back("c failed-calls " + std::to_string(failed));
  emit_samples(out, a, std::move(j), std::move(text), inst.sampling, samples);
  report_calls(err, a.c, *oracle);
  return kExitOk;
}

int run_wsample(const SampleArgs& a, std::ostream& out, std::ostream& err) {
  ProblemInstance inst = parse_dimacs(read_input(a.c.input));
  const std::uint64_t seed = resolve_seed(a.c);
  auto oracle = factory_for(a.c)();
  json warnings = json::array();
  warn_if_not_support(inst, *oracle, warnings, err);
  if (a.tilt.empty()) throw UsageError("wsample needs --tilt <r> or --tilt auto");
  const Rational r = resolve_tilt(a.tilt, inst, *oracle);
  const WeightgenSetup setup = weightgen_prepare(inst, a.epsilon, r, seed, *oracle);
  json j{{"command", "wsample"},
         {"variant", "weightgen"},
         {"seed", seed},
         {"epsilon", a.epsilon},
         {"n", a.n},
         {"tilt", r.get_str()},
         {"kappa", setup.params.kappa},
         {"pivot", setup.params.pivot},
         {"hi_thresh", setup.params.hi_thresh},
         {"lo_thresh", setup.params.lo_thresh},
         {"q", setup.q},
         {"w_max", setup.w_max.get_str()},
         {"exhaustive", setup.exhaustive.has_value()}};
  std::vector<std::string> text{
      "c seed " + std::to_string(seed), "c variant weightgen",
      "c epsilon " + fmt(a.epsilon) + " tilt " + r.get_str() + " kappa " + fmt(setup.params.kappa) + " pivot " +
          std::to_string(setup.params.pivot) + " hi-thresh " + fmt(setup.params.hi_thresh) + " lo-thresh " +
          fmt(setup.params.lo_thresh),
      "c q " + std::to_string(setup.q) + " w-max " + setup.w_max.get_str() + (setup.exhaustive ? " exhaustive" : "")};
  std::uint64_t failed = 0;
  Rng rng = Rng(seed).child(1);
  const auto samples =
      draw_until(a.n, a.max_retries, [&] { return weightgen_draw(inst, setup, rng, *oracle); }, failed);
  j["failed_calls"] = failed;
  j["warnings"] = warnings;
  text.push_back("c failed-calls " + std::to_string(failed));
  emit_samples(out, a, std::move(j), std::move(text), inst.sampling, samples);
  report_calls(err, a.c, *oracle);
  return kExitOk;
}

// mis -------------------------------------------------------------------

struct MisArgs {
  Common c;
  std::vector<Var> must, candidates;
  std::uint64_t budget = 0;
  bool no_local_deps = false;
  bool no_repair = false;
};

int run_mis(const MisArgs& a, std::ostream& out, std::ostream& err) {
  const ProblemInstance inst = parse_dimacs(read_input(a.c.input));
  const auto* cnf = std::get_if<CnfFormula>(&inst.formula);
  if (!cnf) throw InputError("mis needs CNF input");
  const std::uint64_t seed = resolve_seed(a.c);
  auto oracle = factory_for(a.c)();
  MisOptions opts;
  opts.seed = seed;
  opts.budget = a.budget;
  opts.local_deps = !a.no_local_deps;
  opts.repair = !a.no_repair;
  std::optional<std::vector<Var>> v;
  if (!a.candidates.empty()) v = a.candidates;
  const SupportSets s = mis(*cnf, a.must, v, opts, *oracle);
  std::string ind = "c ind";
  for (Var x : s.result) ind += ' ' + std::to_string(x);
  ind += " 0";
  json j{{"command", "mis"},         {"seed", seed},           {"support", s.result},
         {"size", s.result.size()},  {"minimal", s.minimal},   {"repaired", s.repaired},
         {"local_dependencies", s.z}, {"sat_calls", s.sat_calls}};
  print(out, a.c, j,
        {"c seed " + std::to_string(seed), "c local-dependencies " + std::to_string(s.z.size()),
         "c sat-calls " + std::to_string(s.sat_calls) + (s.minimal ? " minimal" : " budget-exhausted") +
             (s.repaired ? " repaired" : ""),
         ind, "c size " + std::to_string(s.result.size())});
  report_calls(err, a.c, *oracle);
  return kExitOk;
}

// relnet ----------------------------------------------------------------

struct RelnetArgs {
  Common c;
  double epsilon = 0.8, delta = 0.2;
  Node source = 0, sink = 0;
  bool all_pairs = false, directed = false;
  std::uint32_t threads = 1;
};

int run_relnet(const RelnetArgs& a, std::ostream& out, std::ostream& err) {
  if (a.all_pairs == (a.source != 0 || a.sink != 0) || (!a.all_pairs && (a.source == 0 || a.sink == 0)))
    throw UsageError("give either --source and --sink, or --all-pairs");
  const ReliabilityGraph g = parse_graph(read_input(a.c.input), a.directed);
  const std::uint64_t seed = resolve_seed(a.c);
  const OracleFactory factory = factory_for(a.c);
  std::vector<ReliabilityEstimate> rows;
  if (a.all_pairs) {
    rows = all_pairs_unreliability(g, a.epsilon, a.delta, seed, a.threads, factory);
  } else {
    auto oracle = factory();
    rows.push_back(estimate_unreliability(g, a.source, a.sink, a.epsilon, a.delta, seed, *oracle));
    report_calls(err, a.c, *oracle);
  }
  json jrows = json::array();
  std::vector<std::string> text{"c seed " + std::to_string(seed),
                                "c epsilon " + fmt(a.epsilon) + " delta " + fmt(a.delta) + " edges " +
                                    std::to_string(g.edges.size()) + " bits " + std::to_string(g.total_bits()) +
                                    (a.directed ? " directed" : " undirected"),
                                "c u v r exact"};
  for (const auto& r : rows) {
    jrows.push_back({{"u", r.u},
                     {"v", r.v},
                     {"r", r.r.get_d()},
                     {"r_exact", r.r.get_str()},
                     {"exact", r.raw.exact},
                     {"epsilon", r.epsilon},
                     {"delta", r.delta},
                     {"seed", r.seed}});
    text.push_back(std::to_string(r.u) + ' ' + std::to_string(r.v) + ' ' + decimal(r.r) +
                   (r.raw.exact ? " exact" : " approx"));
  }
  json j{{"command", "relnet"}, {"seed", seed}, {"directed", a.directed}, {"rows", jrows}};
  print(out, a.c, j, text);
  return kExitOk;
}

// reduce ----------------------------------------------------------------

struct ReduceArgs {
  Common c;
  std::string mode = "conjunctive";
};

int run_reduce(const ReduceArgs& a, std::ostream& out, std::ostream&) {
  const ProblemInstance inst = parse_dimacs(read_input(a.c.input));
  Reduction red;
  if (a.mode == "conjunctive") {
    red = reduce_wmc_conjunctive(inst);
  } else if (a.mode == "implicative") {
    red = reduce_wmc_implicative(inst);
  } else if (a.mode == "form-preserving") {
    red = reduce_wmc_form_preserving(inst);
  } else {
    throw UsageError("unknown mode '" + a.mode + "'");
  }
  const std::string dimacs = serialize_dimacs(red.instance);
  json j{{"command", "reduce"},
         {"mode", a.mode},
         {"m_hat", red.plan.m_hat},
         {"c_f", red.plan.c_f.get_str()},
         {"correction", red.plan.correction.get_str()},
         {"num_vars", red.instance.num_vars()},
         {"gate_vars", red.plan.gate_vars},
         {"dimacs", dimacs}};
  std::vector<std::string> text{"c mode " + a.mode, "c C_F 2^-" + std::to_string(red.plan.m_hat)};
  if (red.plan.correction != 0) text.push_back("c correction " + red.plan.correction.get_str());
  if (a.c.json) {
    out << j.dump() << '\n';
  } else {
    for (const auto& line : text) out << line << '\n';
    out << dimacs;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hashing-based approximate counting, sampling and support extraction", "cellcount"};
  app.require_subcommand(1);

  CountArgs count;
  auto* c = app.add_subcommand("count", "Approximate projected model count");
  add_common(c, count.c);
  c->add_option("--epsilon", count.epsilon, "Tolerance")->capture_default_str();
  c->add_option("--delta", count.delta, "Confidence parameter")->capture_default_str();
  c->add_flag("--mis-first", count.mis_first, "Replace S by a minimal independent support inside S first");

  WcountArgs wcount;
  auto* wc = app.add_subcommand("wcount", "Approximate weighted model count");
  add_common(wc, wcount.c);
  wc->add_option("--epsilon", wcount.epsilon, "Tolerance")->capture_default_str();
  wc->add_option("--delta", wcount.delta, "Confidence parameter")->capture_default_str();
  wc->add_option("--tilt", wcount.tilt, "Upper bound on the tilt (rational, or 'auto' to enumerate)");
  wc->add_option("--method", wcount.method, "weightmc or chain")
      ->check(CLI::IsMember({"weightmc", "chain"}))
      ->capture_default_str();

  SampleArgs sample;
  auto* s = app.add_subcommand("sample", "Almost-uniform witnesses projected on S");
  add_common(s, sample.c);
  s->add_option("--variant", sample.variant, "unigen or unigen2")
      ->check(CLI::IsMember({"unigen", "unigen2"}))
      ->capture_default_str();
  s->add_option("--epsilon", sample.epsilon, "Tolerance")->capture_default_str();
  s->add_option("-N,--samples", sample.n, "Number of witnesses")->capture_default_str();
  s->add_flag("--freq", sample.freq, "Print '<witness> <count>' pairs");
  s->add_option("--threads", sample.threads, "Workers for unigen2")->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--max-retries", sample.max_retries, "Retries per failed call")->capture_default_str();
  s->add_flag("--mis-first", sample.mis_first, "Replace S by a minimal independent support inside S first");

  SampleArgs wsample;
  auto* ws = app.add_subcommand("wsample", "Almost weighted-uniform witnesses");
  add_common(ws, wsample.c);
  ws->add_option("--epsilon", wsample.epsilon, "Tolerance")->capture_default_str();
  ws->add_option("--tilt", wsample.tilt, "Upper bound on the tilt (rational, or 'auto' to enumerate)");
  ws->add_option("-N,--samples", wsample.n, "Number of witnesses")->capture_default_str();
  ws->add_flag("--freq", wsample.freq, "Print '<witness> <count>' pairs");
  ws->add_option("--max-retries", wsample.max_retries, "Retries per failed call")->capture_default_str();

  MisArgs mis_args;
  auto* m = app.add_subcommand("mis", "Minimal independent support");
  add_common(m, mis_args.c);
  m->add_option("--must", mis_args.must, "Variables that must be kept (U)")->delimiter(',');
  m->add_option("--candidates", mis_args.candidates, "Candidate superset (V); default all variables")->delimiter(',');
  m->add_option("--budget", mis_args.budget, "SAT-call budget for deletion, 0 for none")->capture_default_str();
  m->add_flag("--no-local-deps", mis_args.no_local_deps, "Skip local dependency pruning");
  m->add_flag("--no-repair", mis_args.no_repair, "Fail when the candidates are not a support");

  RelnetArgs relnet;
  auto* r = app.add_subcommand("relnet", "Two-terminal unreliability");
  add_common(r, relnet.c);
  r->add_option("--epsilon", relnet.epsilon, "Tolerance")->capture_default_str();
  r->add_option("--delta", relnet.delta, "Confidence parameter")->capture_default_str();
  r->add_option("--source", relnet.source, "Source node");
  r->add_option("--sink", relnet.sink, "Sink node");
  r->add_flag("--all-pairs", relnet.all_pairs, "Every ordered (directed) or unordered pair");
  r->add_flag("--directed", relnet.directed, "Edges are traversable from start to end only");
  r->add_option("--threads", relnet.threads, "Workers for --all-pairs")->check(CLI::PositiveNumber)->capture_default_str();

  ReduceArgs reduce;
  auto* rd = app.add_subcommand("reduce", "Weighted to unweighted reduction via chain formulas");
  add_common(rd, reduce.c);
  rd->add_option("--mode", reduce.mode, "conjunctive, implicative or form-preserving")
      ->check(CLI::IsMember({"conjunctive", "implicative", "form-preserving"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c->parsed()) return run_count(count, out, err);
    if (wc->parsed()) return run_wcount(wcount, out, err);
    if (s->parsed()) return run_sample(sample, out, err);
    if (ws->parsed()) return run_wsample(wsample, out, err);
    if (m->parsed()) return run_mis(mis_args, out, err);
    if (r->parsed()) return run_relnet(relnet, out, err);
    return run_reduce(reduce, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ReductionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Unsatisfiable& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NotASupport& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const AllCoresFailed& e) {
    err << "error: " << e.what() << '\n';
    return kExitAllFailed;
  } catch (const RetryCapExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kExitAllFailed;
  } catch (const OracleError& e) {
    err << "error: solver: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace cellcount
