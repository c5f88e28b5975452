// SPDX-License-Identifier: MIT
#include "cellcount/hashing.hpp"

#include <stdexcept>

namespace cellcount {

XorHash draw_hash(std::uint32_t n, std::uint32_t m, Rng& rng) {
  if (n < 1 || m > n) throw std::invalid_argument("draw_hash requires n >= 1 and m <= n");
  XorHash h;
  h.n = n;
  h.constants.resize(m);
  h.coeffs.assign(m, BitVec(n));
  for (std::uint32_t i = 0; i < m; ++i) {
    h.constants[i] = rng.bit();
    for (std::uint32_t k = 0; k < n; ++k) h.coeffs[i].set(k, rng.bit());
  }
  h.target = BitVec(m);
  for (std::uint32_t i = 0; i < m; ++i) h.target.set(i, rng.bit());
  return h;
}

CellId prefix(std::shared_ptr<const XorHash> h, std::uint32_t m) {
  if (!h || m > h->rows()) throw std::out_of_range("prefix length exceeds hash rows");
  return CellId{std::move(h), m};
}

HashImage eval(const CellId& c, const BitVec& y) {
  const XorHash& h = *c.hash;
  if (y.size() != h.n) throw std::invalid_argument("eval: width mismatch");
  HashImage r;
  r.image = BitVec(c.m);
  r.member = true;
  for (std::uint32_t i = 0; i < c.m; ++i) {
    const bool bit = h.constants[i] != h.coeffs[i].and_parity(y);
    r.image.set(i, bit);
    if (bit != h.target.get(i)) r.member = false;
  }
  return r;
}

std::vector<XorClause> to_xor_clauses(const CellId& c, const SamplingSet& s) {
  const XorHash& h = *c.hash;
  if (s.size() != h.n) throw std::invalid_argument("to_xor_clauses: |S| must equal hash width");
  std::vector<XorClause> out;
  out.reserve(c.m);
  for (std::uint32_t i = 0; i < c.m; ++i) {
    XorClause x;
    x.parity = h.target.get(i) != h.constants[i];
    for (std::size_t k = h.coeffs[i].next_set(0); k < h.n; k = h.coeffs[i].next_set(k + 1)) x.vars.push_back(s[k]);
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace cellcount
