#pragma once

#include <utility>
#include <vector>

namespace evacnet::lp::detail {

/// Sparse LU factorization of a square basis matrix with Markowitz pivoting.
/// Singleton columns and rows are taken first, which makes the near-triangular
/// bases of network-like programs essentially free to factor.
class SparseLU {
 public:
  using Column = std::vector<std::pair<int, double>>;  // (row, value)

  /// Factors the m x m matrix whose j-th column is cols[j]. Returns false if
  /// the matrix is numerically singular; singular_positions() and
  /// unpivoted_rows() then describe the deficiency (equal lengths).
  bool factor(int m, const std::vector<Column>& cols);

  /// Solves B x = b. `b` is indexed by row and destroyed; `x` by column.
  void ftran(std::vector<double>& b, std::vector<double>& x) const;
  /// Solves B^T y = c. `c` is indexed by column and destroyed; `y` by row.
  void btran(std::vector<double>& c, std::vector<double>& y) const;

  const std::vector<int>& singular_positions() const { return singular_cols_; }
  const std::vector<int>& unpivoted_rows() const { return unpivoted_rows_; }
  std::size_t nonzeros() const { return nnz_; }

 private:
  struct Step {
    int row = 0;
    int col = 0;
    double pivot = 0.0;
    std::vector<std::pair<int, double>> upper;  // (col, value), pivot excluded
    std::vector<std::pair<int, double>> lower;  // (row, multiplier)
  };

  int m_ = 0;
  std::vector<Step> steps_;
  std::vector<int> singular_cols_;
  std::vector<int> unpivoted_rows_;
  std::size_t nnz_ = 0;
};

}  // namespace evacnet::lp::detail
