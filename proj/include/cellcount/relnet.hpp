// SPDX-License-Identifier: MIT
//
// Two-terminal unreliability r(u, v): the probability that u and v are
// disconnected when each edge is up independently with a dyadic
// probability k / 2^m. Weighted edges become chain-graph gadgets of
// probability-1/2 edges, and the disconnecting edge subsets are counted
// as S-projected models of a reachability encoding.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "cellcount/counting.hpp"
#include "cellcount/formula.hpp"
#include "cellcount/oracle.hpp"

namespace cellcount {

using Node = std::uint32_t;

struct GraphEdge {
  Node start = 0, end = 0;
  std::uint32_t k = 1, m = 1;  // up-probability k / 2^m

  Rational up() const;
  bool operator==(const GraphEdge&) const = default;
};

// Nodes are 1..num_nodes. Undirected edges can be traversed both ways.
struct ReliabilityGraph {
  std::uint32_t num_nodes = 0;
  std::vector<GraphEdge> edges;
  bool directed = false;

  std::uint32_t total_bits() const;  // M = sum of m over edges
};

// "p graph <nodes> <edges>", then "e <u> <v> [k m]" lines; "c" comments.
ReliabilityGraph parse_graph(std::string_view text, bool directed = false);

// Chain-graph gadget edges between `from` and `to`; internal nodes are
// numbered from next_node, which is advanced. Exactly k of the 2^m edge
// subsets connect from and to.
std::vector<GraphEdge> chain_gadget(std::uint32_t k, std::uint32_t m, Node from, Node to, Node& next_node);

// Every edge replaced by its gadget; all resulting edges have p = 1/2.
ReliabilityGraph expand_weighted_edges(const ReliabilityGraph& g);

// Units p_u and -p_v, and p_start and q_e -> p_end per edge (both ways
// when undirected, sharing q_e). Node u is variable u; edge j (0-based)
// is variable num_nodes + 1 + j. The edge variables are the sampling set.
ProblemInstance encode_disconnection(const ReliabilityGraph& g, Node u, Node v);

struct ReliabilityEstimate {
  Node u = 0, v = 0;
  Rational r{0};
  ApproxCount raw;
  std::uint32_t total_bits = 0;
  double epsilon = 0.8, delta = 0.2;
  std::uint64_t seed = 0;
  CountStats stats;
};

ReliabilityEstimate estimate_unreliability(const ReliabilityGraph& g, Node u, Node v, double epsilon, double delta,
                                           std::uint64_t seed, Oracle& oracle);

// Exact r(u, v) over all 2^|E| edge states of the original graph.
Rational brute_force_unreliability(const ReliabilityGraph& g, Node u, Node v);

// Pairs u < v (undirected) or u != v (directed); pair j uses
// Rng::derive(seed, j) and is handled by worker j mod workers.
std::vector<ReliabilityEstimate> all_pairs_unreliability(const ReliabilityGraph& g, double epsilon, double delta,
                                                         std::uint64_t seed, std::uint32_t workers,
                                                         const std::function<std::unique_ptr<Oracle>()>& make_oracle);

}  // namespace cellcount
