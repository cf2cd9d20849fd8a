#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "msa/errors.hpp"
#include "msa/sparse.hpp"

namespace msa {

/// Sparse Cholesky factorization A + shift*I = L L^T for symmetric positive
/// definite input. Left-looking by columns in natural order; no
/// fill-reducing reordering.
///
/// Throws SolverError when a pivot is not strictly positive (the matrix is
/// numerically singular or indefinite).
class SparseCholesky {
public:
  SparseCholesky(const SparseSymmetric& a, double shift) : n_(a.dim()) {
    col_ptr_.assign(n_ + 1, 0);
    // link[j] chains the columns whose next unconsumed entry sits in row j;
    // next_pos_[k] is that entry's index inside column k.
    std::vector<int> link(n_, -1), next_link(n_, -1), next_pos(n_, 0);
    std::vector<double> work(n_, 0.0);
    std::vector<int> mark(n_, -1);
    std::vector<int> touched;
    touched.reserve(64);
    const auto touch = [&](int i, int j) {
      if (mark[i] != j) {
        mark[i] = j;
        work[i] = 0.0;
        touched.push_back(i);
      }
    };

    for (int j = 0; j < n_; ++j) {
      // Scatter column j of the lower triangle of A + shift*I. The upper
      // row j of the stored triangle is exactly that column.
      touch(j, j);
      work[j] = shift;
      const auto cols = a.row_cols(j);
      const auto vals = a.row_values(j);
      for (std::size_t p = 0; p < cols.size(); ++p) {
        const int i = cols[p];
        touch(i, j);
        work[i] += vals[p];
      }

      // Pull updates from every finalized column with an entry in row j.
      for (int k = link[j]; k != -1;) {
        const int knext = next_link[k];
        const int pos = next_pos[k];
        const double ljk = values_[pos];
        for (int q = pos; q < col_ptr_[k + 1]; ++q) {
          const int i = rows_[q];
          touch(i, j);
          work[i] -= ljk * values_[q];
        }
        // Re-chain column k under its next remaining row.
        if (pos + 1 < col_ptr_[k + 1]) {
          next_pos[k] = pos + 1;
          const int r = rows_[pos + 1];
          next_link[k] = link[r];
          link[r] = k;
        }
        k = knext;
      }

      const double pivot = work[j];
      if (!(pivot > 0.0)) {
        throw SolverError(
            "Cholesky factorization breakdown at column " + std::to_string(j) +
            " (pivot " + std::to_string(pivot) + "): matrix is not positive "
            "definite");
      }
      const double ljj = std::sqrt(pivot);

      std::sort(touched.begin(), touched.end());
      values_.push_back(ljj);
      rows_.push_back(j);
      for (int i : touched) {
        if (i <= j) continue;
        const double v = work[i] / ljj;
        if (v != 0.0) {
          values_.push_back(v);
          rows_.push_back(i);
        }
      }
      touched.clear();
      col_ptr_[j + 1] = static_cast<int>(values_.size());

      // Chain the fresh column under its first off-diagonal row.
      if (col_ptr_[j + 1] - col_ptr_[j] > 1) {
        next_pos[j] = col_ptr_[j] + 1;
        const int r = rows_[col_ptr_[j] + 1];
        next_link[j] = link[r];
        link[r] = j;
      }
    }
  }

  int dim() const { return n_; }

  /// Solves L L^T x = b.
  void solve(std::span<const double> b, std::span<double> x) const {
    if (static_cast<int>(b.size()) != n_ || static_cast<int>(x.size()) != n_)
      throw Error("cholesky solve dimension mismatch");
    std::copy(b.begin(), b.end(), x.begin());
    for (int j = 0; j < n_; ++j) { // forward: L y = b
      x[j] /= values_[col_ptr_[j]];
      const double xj = x[j];
      for (int p = col_ptr_[j] + 1; p < col_ptr_[j + 1]; ++p)
        x[rows_[p]] -= values_[p] * xj;
    }
    for (int j = n_ - 1; j >= 0; --j) { // backward: L^T x = y
      double s = x[j];
      for (int p = col_ptr_[j] + 1; p < col_ptr_[j + 1]; ++p)
        s -= values_[p] * x[rows_[p]];
      x[j] = s / values_[col_ptr_[j]];
    }
  }

  std::vector<double> solve(std::span<const double> b) const {
    std::vector<double> x(n_);
    solve(b, x);
    return x;
  }

private:
  int n_ = 0;
  std::vector<int> col_ptr_; // column pointers into rows_/values_
  std::vector<int> rows_;    // row indices, diagonal first, ascending
  std::vector<double> values_;
};

} // namespace msa
