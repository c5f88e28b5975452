// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <vector>

#include "cellcount/bitvec.hpp"

namespace cellcount {

// Linear system over GF(2). After eliminate() the nonzero rows are in
// reduced row-echelon form with respect to the visiting order: each pivot
// column is set in exactly one row.
class Gf2System {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit Gf2System(std::size_t cols) : cols_(cols) {}

  std::size_t cols() const { return cols_; }
  void add_row(BitVec coeffs, bool rhs);

  // Gauss-Jordan; pivot columns are chosen in `order`. Columns missing
  // from `order` are never pivots.
  void eliminate(const std::vector<std::size_t>& order);
  void eliminate();

  bool inconsistent() const { return inconsistent_; }
  std::size_t rows() const { return rows_.size(); }
  const BitVec& row(std::size_t i) const { return rows_[i]; }
  bool rhs(std::size_t i) const { return rhs_[i]; }
  // Pivot column of row i after elimination.
  std::size_t pivot(std::size_t i) const { return pivots_[i]; }
  bool is_pivot_column(std::size_t c) const { return c < pivot_row_.size() && pivot_row_[c] != npos; }
  std::size_t pivot_row(std::size_t c) const { return pivot_row_[c]; }

 private:
  std::size_t cols_;
  std::vector<BitVec> rows_;
  std::vector<bool> rhs_;
  std::vector<std::size_t> pivots_;
  std::vector<std::size_t> pivot_row_;
  bool inconsistent_ = false;
};

}  // namespace cellcount
