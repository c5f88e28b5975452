// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <cmath>

#include "brute.hpp"
#include "cellcount/relnet.hpp"

using namespace cellcount;

namespace {

// Number of edge subsets of g under which a reaches b.
std::uint64_t connecting_subsets(const ReliabilityGraph& g, Node a, Node b) {
  ReliabilityGraph half = g;
  for (auto& e : half.edges) e.k = e.m = 1;
  const Rational r = brute_force_unreliability(half, a, b);
  BigInt total = 1;
  total <<= static_cast<mp_bitcnt_t>(g.edges.size());
  const Rational connected = (1 - r) * Rational(total);
  return mpz_get_ui(connected.get_num_mpz_t());
}

ReliabilityGraph random_graph(std::uint32_t nodes, std::uint32_t edges, bool directed, bool weighted, Rng& rng) {
  ReliabilityGraph g;
  g.num_nodes = nodes;
  g.directed = directed;
  for (std::uint32_t j = 0; j < edges; ++j) {
    GraphEdge e;
    e.start = static_cast<Node>(1 + rng.below(nodes));
    e.end = static_cast<Node>(1 + rng.below(nodes));
    if (weighted && rng.bit()) {
      e.m = static_cast<std::uint32_t>(1 + rng.below(3));
      e.k = static_cast<std::uint32_t>(2 * rng.below(std::uint64_t{1} << (e.m - 1)) + 1);
    }
    g.edges.push_back(e);
  }
  return g;
}

}  // namespace

TEST_SUITE("relnet") {
  TEST_CASE("graph parsing") {
    const ReliabilityGraph g = parse_graph("c demo\np graph 2 1\ne 1 2\n");
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].up() == Rational(1, 2));
    CHECK_FALSE(g.directed);
    CHECK(parse_graph("p graph 2 1\ne 1 2 3 3\n").edges[0].up() == Rational(3, 8));
    CHECK(parse_graph("p graph 2 1\ne 1 2\n", true).directed);

    auto line_of = [](const char* text) -> std::size_t {
      try {
        parse_graph(text);
      } catch (const ParseError& e) {
        return e.line();
      }
      return 0;
    };
    CHECK(line_of("p graph 2 1\ne 1 2 2 3\n") == 2);
    CHECK(line_of("p graph 2 1\ne 1 3\n") == 2);
    CHECK(line_of("p graph 2 1\ne 1 2 9 3\n") == 2);
    CHECK(line_of("p graph 2 2\ne 1 2\n") == 2);
    CHECK(line_of("e 1 2\n") == 1);
    CHECK(line_of("p graph 2 1\ne 1 x\n") == 2);
  }

  TEST_CASE("gadget shape") {
    Node next = 3;
    const auto g33 = chain_gadget(3, 3, 1, 2, next);
    // 011: one series edge into an internal node, then two parallel edges.
    REQUIRE(g33.size() == 3);
    CHECK(next == 4);
    CHECK(g33[0] == GraphEdge{1, 3, 1, 1});
    CHECK(g33[1] == GraphEdge{3, 2, 1, 1});
    CHECK(g33[2] == GraphEdge{3, 2, 1, 1});

    next = 3;
    CHECK(chain_gadget(1, 1, 1, 2, next).size() == 1);
    CHECK(next == 3);
    CHECK_THROWS(chain_gadget(2, 3, 1, 2, next));
    CHECK_THROWS(chain_gadget(8, 3, 1, 2, next));
  }

  TEST_CASE("gadget count law") {
    for (std::uint32_t m = 1; m <= 6; ++m) {
      for (std::uint32_t k = 1; k < (1U << m); k += 2) {
        Node next = 3;
        ReliabilityGraph g;
        g.edges = chain_gadget(k, m, 1, 2, next);
        g.num_nodes = next - 1;
        CHECK(g.edges.size() == m);
        // Internal nodes: one per zero bit among the top m-1 bits.
        std::uint32_t zeros = 0;
        for (std::uint32_t i = 0; i < m; ++i) zeros += ((k >> i) & 1U) == 0;
        CHECK(g.num_nodes == zeros + 2);
        CHECK(connecting_subsets(g, 1, 2) == k);
        g.directed = true;
        CHECK(connecting_subsets(g, 1, 2) == k);
      }
    }
  }

  TEST_CASE("expansion preserves unreliability") {
    Rng rng(5);
    for (int iter = 0; iter < 60; ++iter) {
      const ReliabilityGraph g = random_graph(2 + rng.below(4), 1 + rng.below(5), rng.bit(), true, rng);
      const ReliabilityGraph x = expand_weighted_edges(g);
      CHECK(x.edges.size() == g.total_bits());
      for (const auto& e : x.edges) CHECK(e.up() == Rational(1, 2));
      if (x.edges.size() > 16) continue;
      CHECK(brute_force_unreliability(x, 1, 2) == brute_force_unreliability(g, 1, 2));
    }
  }

  TEST_CASE("encoding small graphs") {
    ReliabilityGraph single = parse_graph("p graph 2 1\ne 1 2\n");
    ProblemInstance p = encode_disconnection(single, 1, 2);
    CHECK(p.sampling == SamplingSet{3});
    CHECK(brute::projected_models(p.formula, p.sampling) == std::set<std::uint64_t>{0});

    const ReliabilityGraph parallel = parse_graph("p graph 2 2\ne 1 2\ne 1 2\n");
    CHECK(brute::projected_count(encode_disconnection(parallel, 1, 2)) == 1);
    CHECK(brute_force_unreliability(parallel, 1, 2) == Rational(1, 4));

    const ReliabilityGraph series = parse_graph("p graph 3 2\ne 1 3\ne 3 2\n");
    CHECK(brute::projected_count(encode_disconnection(series, 1, 2)) == 3);
    CHECK(brute_force_unreliability(series, 1, 2) == Rational(3, 4));

    CHECK_THROWS(encode_disconnection(single, 1, 1));
    CHECK_THROWS(encode_disconnection(single, 1, 3));
  }

  TEST_CASE("encoding bijection") {
    Rng rng(6);
    for (int iter = 0; iter < 80; ++iter) {
      const ReliabilityGraph g = random_graph(2 + rng.below(5), 1 + rng.below(10), rng.bit(), false, rng);
      const ProblemInstance p = encode_disconnection(g, 1, 2);
      if (num_vars(p.formula) > 20) continue;
      const std::uint64_t disconnecting = (std::uint64_t{1} << g.edges.size()) - connecting_subsets(g, 1, 2);
      CHECK(brute::projected_count(p) == disconnecting);
    }
  }

  TEST_CASE("direction matters only with the directed flag") {
    const ReliabilityGraph back = parse_graph("p graph 2 1\ne 2 1\n");
    CHECK(brute_force_unreliability(back, 1, 2) == Rational(1, 2));
    const ReliabilityGraph back_d = parse_graph("p graph 2 1\ne 2 1\n", true);
    CHECK(brute_force_unreliability(back_d, 1, 2) == 1);
    CHECK(brute::projected_count(encode_disconnection(back_d, 1, 2)) == 2);
  }

  TEST_CASE("pipeline exact cases") {
    BuiltinOracle o;
    const auto half = estimate_unreliability(parse_graph("p graph 2 1\ne 1 2\n"), 1, 2, 0.8, 0.2, 1, o);
    CHECK(half.r == Rational(1, 2));
    CHECK(half.raw.exact);
    const auto w = estimate_unreliability(parse_graph("p graph 2 1\ne 1 2 3 3\n"), 1, 2, 0.8, 0.2, 1, o);
    CHECK(w.r == Rational(5, 8));
    CHECK(w.total_bits == 3);
    const auto none = estimate_unreliability(parse_graph("p graph 3 1\ne 1 3\n"), 1, 2, 0.8, 0.2, 1, o);
    CHECK(none.r == 1);
    const auto empty = estimate_unreliability(parse_graph("p graph 2 0\n"), 1, 2, 0.8, 0.2, 1, o);
    CHECK(empty.r == 1);
  }

  TEST_CASE("brute force agrees with a sampling estimate") {
    // Triangle 1-2-3, all p = 1/2.
    const ReliabilityGraph tri = parse_graph("p graph 3 3\ne 1 2\ne 2 3\ne 1 3\n");
    const Rational r = brute_force_unreliability(tri, 1, 2);
    CHECK(r == Rational(3, 8));
    Rng rng(9);
    const int trials = 20000;
    int disconnected = 0;
    for (int t = 0; t < trials; ++t) {
      const bool e12 = rng.bit(), e23 = rng.bit(), e13 = rng.bit();
      disconnected += !(e12 || (e13 && e23));
    }
    const double p = r.get_d();
    CHECK(std::abs(disconnected - trials * p) <= 3 * std::sqrt(trials * p * (1 - p)));
  }

  TEST_CASE("parallel edges never raise unreliability") {
    Rng rng(10);
    for (int iter = 0; iter < 40; ++iter) {
      ReliabilityGraph g = random_graph(3 + rng.below(3), 2 + rng.below(5), rng.bit(), true, rng);
      const Rational before = brute_force_unreliability(g, 1, 2);
      GraphEdge extra = g.edges[rng.below(g.edges.size())];
      g.edges.push_back(extra);
      CHECK(brute_force_unreliability(g, 1, 2) <= before);
    }
  }

  TEST_CASE("diamond estimates stay within tolerance") {
    const ReliabilityGraph d = parse_graph("p graph 4 5\ne 1 3\ne 1 4\ne 3 2\ne 4 2\ne 3 4\n");
    const Rational r = brute_force_unreliability(d, 1, 2);
    BuiltinOracle o;
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto est = estimate_unreliability(d, 1, 2, 0.8, 0.2, seed, o);
      ok += est.r >= r / Rational(9, 5) && est.r <= r * Rational(9, 5);
    }
    CHECK(ok == 20);  // 5 edges: the count is small enough to be exact
  }

  TEST_CASE("all pairs") {
    const ReliabilityGraph g = parse_graph("p graph 3 2\ne 1 2\ne 2 3\n");
    const auto rows =
        all_pairs_unreliability(g, 0.8, 0.2, 3, 2, [] { return std::make_unique<BuiltinOracle>(); });
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].u == 1);
    CHECK(rows[0].v == 2);
    CHECK(rows[0].r == Rational(1, 2));
    CHECK(rows[1].r == Rational(3, 4));
    CHECK(rows[2].r == Rational(1, 2));
    ReliabilityGraph dg = g;
    dg.directed = true;
    CHECK(all_pairs_unreliability(dg, 0.8, 0.2, 3, 1, [] { return std::make_unique<BuiltinOracle>(); }).size() == 6);
  }
}
