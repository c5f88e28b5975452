// SPDX-License-Identifier: MIT
#pragma once

#include <memory>
#include <vector>

#include "cellcount/bitvec.hpp"
#include "cellcount/formula.hpp"
#include "cellcount/rng.hpp"

namespace cellcount {

// Member of H_xor(n, m): h(y)[i] = a_{i,0} xor (xor_k a_{i,k} y[k]).
struct XorHash {
  std::uint32_t n = 0;
  std::vector<bool> constants;  // a_{i,0}
  std::vector<BitVec> coeffs;   // a_{i,1..n}, width n
  BitVec target;                // alpha, width m

  std::uint32_t rows() const { return static_cast<std::uint32_t>(coeffs.size()); }
};

// Draw order: for each row, a_{i,0} then a_{i,1..n}; then alpha.
XorHash draw_hash(std::uint32_t n, std::uint32_t m, Rng& rng);

// First m rows of a shared hash and the first m target bits.
struct CellId {
  std::shared_ptr<const XorHash> hash;
  std::uint32_t m = 0;
};

CellId prefix(std::shared_ptr<const XorHash> h, std::uint32_t m);

struct HashImage {
  bool member = false;
  BitVec image;  // width m
};

HashImage eval(const CellId& c, const BitVec& y);

// Constraint i ranges over {S[k] : a_{i,k} = 1} with parity alpha[i] xor a_{i,0}.
// Always returns exactly m constraints; an empty row with parity 1 is the
// contradiction marker.
std::vector<XorClause> to_xor_clauses(const CellId& c, const SamplingSet& s);

}  // namespace cellcount
