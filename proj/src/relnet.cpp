// SPDX-License-Identifier: MIT
#include "cellcount/relnet.hpp"

#include <charconv>
#include <exception>
#include <sstream>
#include <thread>

namespace cellcount {

Rational GraphEdge::up() const {
  BigInt den = 1;
  den <<= m;
  return Rational(BigInt(k), den);
}

std::uint32_t ReliabilityGraph::total_bits() const {
  std::uint32_t total = 0;
  for (const auto& e : edges) total += e.m;
  return total;
}

namespace {

constexpr std::uint32_t kMaxEdgeBits = 31;

bool valid_probability(std::uint64_t k, std::uint64_t m) {
  return m >= 1 && m <= kMaxEdgeBits && k % 2 == 1 && k < (std::uint64_t{1} << m);
}

}  // namespace

ReliabilityGraph parse_graph(std::string_view text, bool directed) {
  ReliabilityGraph g;
  g.directed = directed;
  bool header = false;
  std::size_t declared_edges = 0, line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag == "c") continue;
    std::vector<std::string> fields;
    for (std::string f; ls >> f;) fields.push_back(f);
    auto number = [&](std::size_t i) -> std::uint64_t {
      std::uint64_t v = 0;
      const auto& s = fields.at(i);
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        const std::size_t col = line.find(s) + 1;
        throw ParseError(line_no, col, "expected a non-negative integer, got '" + s + "'");
      }
      return v;
    };
    if (tag == "p") {
      if (header) throw ParseError(line_no, 1, "duplicate header");
      if (fields.size() != 3 || fields[0] != "graph") throw ParseError(line_no, 1, "expected 'p graph <nodes> <edges>'");
      g.num_nodes = static_cast<std::uint32_t>(number(1));
      declared_edges = number(2);
      header = true;
    } else if (tag == "e") {
      if (!header) throw ParseError(line_no, 1, "edge before header");
      if (fields.size() != 2 && fields.size() != 4) throw ParseError(line_no, 1, "expected 'e <u> <v> [k m]'");
      GraphEdge e;
      const std::uint64_t u = number(0), v = number(1);
      if (u < 1 || u > g.num_nodes || v < 1 || v > g.num_nodes)
        throw ParseError(line_no, 3, "edge endpoint outside 1.." + std::to_string(g.num_nodes));
      e.start = static_cast<Node>(u);
      e.end = static_cast<Node>(v);
      if (fields.size() == 4) {
        const std::uint64_t k = number(2), m = number(3);
        if (!valid_probability(k, m))
          throw ParseError(line_no, line.find(fields[2]) + 1,
                           "edge probability k/2^m needs odd k with 1 <= k < 2^m and 1 <= m <= 31");
        e.k = static_cast<std::uint32_t>(k);
        e.m = static_cast<std::uint32_t>(m);
      }
      g.edges.push_back(e);
    } else {
      throw ParseError(line_no, 1, "unknown line type '" + tag + "'");
    }
  }
  if (!header) throw ParseError(line_no, 1, "missing 'p graph' header");
  if (g.edges.size() != declared_edges)
    throw ParseError(line_no, 1,
                     "header declares " + std::to_string(declared_edges) + " edges, found " +
                         std::to_string(g.edges.size()));
  return g;
}

std::vector<GraphEdge> chain_gadget(std::uint32_t k, std::uint32_t m, Node from, Node to, Node& next_node) {
  if (!valid_probability(k, m)) throw std::invalid_argument("gadget needs odd k with 1 <= k < 2^m");
  std::vector<GraphEdge> out;
  // Bits of k from most significant: a 1 puts an edge in parallel with
  // the rest, a 0 puts one in series before it.
  Node head = from;
  for (std::uint32_t i = 0; i + 1 < m; ++i) {
    const bool bit = (k >> (m - 1 - i)) & 1U;
    if (bit) {
      out.push_back({head, to, 1, 1});
    } else {
      const Node w = next_node++;
      out.push_back({head, w, 1, 1});
      head = w;
    }
  }
  out.push_back({head, to, 1, 1});
  return out;
}

ReliabilityGraph expand_weighted_edges(const ReliabilityGraph& g) {
  ReliabilityGraph out;
  out.directed = g.directed;
  Node next = g.num_nodes + 1;
  for (const auto& e : g.edges) {
    if (e.k == 1 && e.m == 1) {
      out.edges.push_back(e);
      continue;
    }
    for (const auto& d : chain_gadget(e.k, e.m, e.start, e.end, next)) out.edges.push_back(d);
  }
  out.num_nodes = next - 1;
  return out;
}

ProblemInstance encode_disconnection(const ReliabilityGraph& g, Node u, Node v) {
  if (u < 1 || u > g.num_nodes || v < 1 || v > g.num_nodes)
    throw std::invalid_argument("terminal outside 1.." + std::to_string(g.num_nodes));
  if (u == v) throw std::invalid_argument("source and sink must differ");
  const std::uint32_t n = g.num_nodes;
  CnfFormula f;
  f.num_vars = n + static_cast<std::uint32_t>(g.edges.size());
  f.clauses.push_back({Lit(u, false)});
  f.clauses.push_back({Lit(v, true)});
  SamplingSet s;
  for (std::size_t j = 0; j < g.edges.size(); ++j) {
    const Var q = n + 1 + static_cast<Var>(j);
    const auto& e = g.edges[j];
    f.clauses.push_back({Lit(e.start, true), Lit(q, true), Lit(e.end, false)});
    if (!g.directed) f.clauses.push_back({Lit(e.end, true), Lit(q, true), Lit(e.start, false)});
    s.push_back(q);
  }
  ProblemInstance p = make_instance(std::move(f));
  p.sampling = std::move(s);
  return p;
}

ReliabilityEstimate estimate_unreliability(const ReliabilityGraph& g, Node u, Node v, double epsilon, double delta,
                                           std::uint64_t seed, Oracle& oracle) {
  const ReliabilityGraph expanded = expand_weighted_edges(g);
  const ProblemInstance inst = encode_disconnection(expanded, u, v);
  ReliabilityEstimate est;
  est.u = u;
  est.v = v;
  est.epsilon = epsilon;
  est.delta = delta;
  est.seed = seed;
  est.total_bits = g.total_bits();
  if (inst.sampling.empty()) {
    // No edges: the single empty state disconnects.
    est.raw.significand = 1;
    est.raw.exact = true;
    est.r = 1;
    return est;
  }
  const CountResult c = approxmc2(inst, epsilon, delta, seed, oracle);
  est.raw = c.count;
  est.stats = c.stats;
  BigInt den = 1;
  den <<= est.total_bits;
  est.r = Rational(c.count.value(), den);
  est.r.canonicalize();
  return est;
}

Rational brute_force_unreliability(const ReliabilityGraph& g, Node u, Node v) {
  const std::size_t e = g.edges.size();
  if (e > 24) throw std::invalid_argument("brute-force unreliability limited to 24 edges");
  if (u < 1 || u > g.num_nodes || v < 1 || v > g.num_nodes) throw std::invalid_argument("terminal out of range");
  std::vector<Rational> up(e), down(e);
  for (std::size_t j = 0; j < e; ++j) {
    up[j] = g.edges[j].up();
    down[j] = 1 - up[j];
  }
  Rational total(0);
  std::vector<char> seen(g.num_nodes + 1);
  std::vector<Node> stack;
  for (std::uint64_t sigma = 0; sigma < (std::uint64_t{1} << e); ++sigma) {
    std::fill(seen.begin(), seen.end(), 0);
    stack.assign(1, u);
    seen[u] = 1;
    while (!stack.empty()) {
      const Node x = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < e; ++j) {
        if (!((sigma >> j) & 1U)) continue;
        const auto& ed = g.edges[j];
        Node y = 0;
        if (ed.start == x) y = ed.end;
        else if (!g.directed && ed.end == x) y = ed.start;
        if (y && !seen[y]) {
          seen[y] = 1;
          stack.push_back(y);
        }
      }
    }
    if (seen[v]) continue;
    Rational p(1);
    for (std::size_t j = 0; j < e; ++j) p *= ((sigma >> j) & 1U) ? up[j] : down[j];
    total += p;
  }
  return total;
}

std::vector<ReliabilityEstimate> all_pairs_unreliability(const ReliabilityGraph& g, double epsilon, double delta,
                                                         std::uint64_t seed, std::uint32_t workers,
                                                         const std::function<std::unique_ptr<Oracle>()>& make_oracle) {
  if (workers < 1) throw std::invalid_argument("need at least one worker");
  std::vector<std::pair<Node, Node>> pairs;
  for (Node a = 1; a <= g.num_nodes; ++a)
    for (Node b = 1; b <= g.num_nodes; ++b)
      if (a != b && (g.directed || a < b)) pairs.emplace_back(a, b);
  std::vector<ReliabilityEstimate> out(pairs.size());
  std::vector<std::exception_ptr> errors(workers);
  auto run = [&](std::uint32_t w) {
    try {
      auto oracle = make_oracle();
      for (std::size_t j = w; j < pairs.size(); j += workers)
        out[j] = estimate_unreliability(g, pairs[j].first, pairs[j].second, epsilon, delta, Rng::derive(seed, j),
                                        *oracle);
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
  return out;
}

}  // namespace cellcount
