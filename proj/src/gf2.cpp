// SPDX-License-Identifier: MIT
#include "cellcount/gf2.hpp"

#include <numeric>
#include <stdexcept>
#include <utility>

namespace cellcount {

void Gf2System::add_row(BitVec coeffs, bool rhs) {
  if (coeffs.size() != cols_) throw std::invalid_argument("Gf2System: row width mismatch");
  rows_.push_back(std::move(coeffs));
  rhs_.push_back(rhs);
}

void Gf2System::eliminate() {
  std::vector<std::size_t> order(cols_);
  std::iota(order.begin(), order.end(), 0);
  eliminate(order);
}

void Gf2System::eliminate(const std::vector<std::size_t>& order) {
  std::size_t rank = 0;
  pivot_row_.assign(cols_, npos);
  std::vector<std::size_t> piv;
  for (std::size_t c : order) {
    if (rank == rows_.size()) break;
    std::size_t r = rank;
    while (r < rows_.size() && !rows_[r].get(c)) ++r;
    if (r == rows_.size()) continue;
    if (r != rank) {
      std::swap(rows_[r], rows_[rank]);
      const bool t = rhs_[r];
      rhs_[r] = rhs_[rank];
      rhs_[rank] = t;
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i != rank && rows_[i].get(c)) {
        rows_[i] ^= rows_[rank];
        rhs_[i] = rhs_[i] != rhs_[rank];
      }
    }
    pivot_row_[c] = rank;
    piv.push_back(c);
    ++rank;
  }
  inconsistent_ = false;
  for (std::size_t i = rank; i < rows_.size(); ++i) {
    if (rows_[i].none() && rhs_[i]) inconsistent_ = true;
  }
  // Rows past rank can only be nonzero in columns excluded from `order`;
  // they are dropped only when zero.
  std::vector<BitVec> kept_rows(rows_.begin(), rows_.begin() + static_cast<std::ptrdiff_t>(rank));
  std::vector<bool> kept_rhs(rhs_.begin(), rhs_.begin() + static_cast<std::ptrdiff_t>(rank));
  for (std::size_t i = rank; i < rows_.size(); ++i) {
    if (!rows_[i].none()) {
      kept_rows.push_back(rows_[i]);
      kept_rhs.push_back(rhs_[i]);
      piv.push_back(npos);
    }
  }
  rows_ = std::move(kept_rows);
  rhs_ = std::move(kept_rhs);
  pivots_ = std::move(piv);
}

}  // namespace cellcount
