#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "msa/dense.hpp"
#include "msa/errors.hpp"

namespace msa {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Sparse symmetric matrix storing each entry once, at (row <= col), in
/// CSR-like compressed form. Entries that accumulate to exactly 0.0 are
/// pruned, so the stored pattern is the weighted dof-adjacency graph.
class SparseSymmetric {
public:
  SparseSymmetric() = default;
  explicit SparseSymmetric(int n) : n_(n), row_ptr_(n + 1, 0) {}

  /// Builds from triplets, folding (r, c) and (c, r) onto the upper
  /// triangle. Duplicates are summed in the order given (stable), which
  /// pins the floating-point accumulation order.
  static SparseSymmetric from_triplets(int n, std::vector<Triplet> triplets) {
    for (auto& t : triplets) {
      if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
        throw Error("triplet index out of range");
      if (t.row > t.col) std::swap(t.row, t.col);
    }
    std::stable_sort(triplets.begin(), triplets.end(),
                     [](const Triplet& a, const Triplet& b) {
                       return a.row != b.row ? a.row < b.row : a.col < b.col;
                     });
    SparseSymmetric m(n);
    std::size_t i = 0;
    while (i < triplets.size()) {
      const int r = triplets[i].row, c = triplets[i].col;
      double sum = 0.0;
      while (i < triplets.size() && triplets[i].row == r &&
             triplets[i].col == c)
        sum += triplets[i++].value;
      if (sum != 0.0) {
        m.cols_.push_back(c);
        m.values_.push_back(sum);
        ++m.row_ptr_[r + 1];
      }
    }
    for (int r = 0; r < n; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
  }

  int dim() const { return n_; }
  int nnz() const { return static_cast<int>(values_.size()); }

  /// Stored (upper-triangle) entries of row r.
  std::span<const int> row_cols(int r) const {
    return {cols_.data() + row_ptr_[r],
            static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
  }
  std::span<const double> row_values(int r) const {
    return {values_.data() + row_ptr_[r],
            static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
  }

  /// y = A x, expanding symmetry on the fly. Deterministic summation
  /// order (storage order). Safe to call concurrently on distinct y.
  void matvec(std::span<const double> x, std::span<double> y) const {
    if (static_cast<int>(x.size()) != n_ || static_cast<int>(y.size()) != n_)
      throw Error("matvec dimension mismatch");
    std::fill(y.begin(), y.end(), 0.0);
    for (int r = 0; r < n_; ++r) {
      for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
        const int c = cols_[p];
        const double a = values_[p];
        y[r] += a * x[c];
        if (c != r) y[c] += a * x[r];
      }
    }
  }

  std::vector<double> matvec(std::span<const double> x) const {
    std::vector<double> y(n_);
    matvec(x, y);
    return y;
  }

  /// 1-norm (max absolute column sum; equals max row sum by symmetry).
  double norm1() const {
    std::vector<double> colsum(n_, 0.0);
    for (int r = 0; r < n_; ++r) {
      for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
        const int c = cols_[p];
        const double a = std::abs(values_[p]);
        colsum[c] += a;
        if (c != r) colsum[r] += a;
      }
    }
    double m = 0.0;
    for (double s : colsum) m = std::max(m, s);
    return m;
  }

  DenseMatrix to_dense() const {
    DenseMatrix d(n_, n_);
    for (int r = 0; r < n_; ++r)
      for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
        d(r, cols_[p]) = values_[p];
        d(cols_[p], r) = values_[p];
      }
    return d;
  }

  /// Coordinate text dump of the stored triangle, one "row col value" line
  /// per entry (0-based indices, 17 significant digits).
  std::string dump_coordinate() const {
    std::string out = "# symmetric sparse matrix, upper triangle, n=" +
                      std::to_string(n_) + " nnz=" + std::to_string(nnz()) +
                      "\n";
    char buf[64];
    for (int r = 0; r < n_; ++r)
      for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
        std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", r, cols_[p],
                      values_[p]);
        out += buf;
      }
    return out;
  }

private:
  int n_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> cols_;
  std::vector<double> values_;
};

} // namespace msa
