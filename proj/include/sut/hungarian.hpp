#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

#include "sut/errors.hpp"

namespace sut {

/// Result of a rectangular assignment. Matches are (row, column) pairs in
/// ascending row order; every row or column left out of the matching is
/// listed separately.
struct Assignment {
  std::vector<std::pair<int, int>> matches;
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
};

namespace detail {

// Shortest-augmenting-path assignment with dual potentials, O(n^2 m).
// Minimizes total cost over complete matchings of all n rows (n <= m).
// Deterministic: rows are processed in order and equal-cost alternatives
// resolve to the lowest column index.
inline std::vector<int> min_cost_row_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> col_to_row(m + 1, 0);  // 0 = free, else row index + 1
  std::vector<int> way(m + 1, 0);

  for (int row = 1; row <= n; ++row) {
    col_to_row[0] = row;
    int j0 = 0;
    std::vector<double> min_slack(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int r0 = col_to_row[j0];
      double delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double reduced = cost(r0 - 1, j - 1) - u[r0] - v[j];
        if (reduced < min_slack[j]) {
          min_slack[j] = reduced;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[col_to_row[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_to_row[j0] != 0);
    do {
      const int j1 = way[j0];
      col_to_row[j0] = col_to_row[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (col_to_row[j] > 0) row_to_col[col_to_row[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace detail

/// Maximum-total-similarity one-to-one assignment on a rectangular matrix
/// (rows x cols, higher entries preferred). Always matches min(rows, cols)
/// pairs; callers reject weak pairs afterwards against their own threshold.
inline Assignment hungarian(const Eigen::MatrixXd& similarity) {
  if (!similarity.allFinite()) {
    throw std::invalid_argument("hungarian: similarity matrix must be finite");
  }
  const int rows = static_cast<int>(similarity.rows());
  const int cols = static_cast<int>(similarity.cols());

  Assignment out;
  if (rows == 0 || cols == 0) {
    for (int i = 0; i < rows; ++i) out.unmatched_rows.push_back(i);
    for (int j = 0; j < cols; ++j) out.unmatched_cols.push_back(j);
    return out;
  }

  const bool transposed = rows > cols;
  const Eigen::MatrixXd cost =
      transposed ? Eigen::MatrixXd(-similarity.transpose())
                 : Eigen::MatrixXd(-similarity);
  const std::vector<int> row_to_col = detail::min_cost_row_assignment(cost);

  std::vector<char> row_matched(rows, 0), col_matched(cols, 0);
  for (int i = 0; i < static_cast<int>(row_to_col.size()); ++i) {
    const int j = row_to_col[i];
    if (j < 0) continue;
    const int r = transposed ? j : i;
    const int c = transposed ? i : j;
    out.matches.emplace_back(r, c);
    row_matched[r] = 1;
    col_matched[c] = 1;
  }
  std::sort(out.matches.begin(), out.matches.end());
  for (int i = 0; i < rows; ++i) {
    if (!row_matched[i]) out.unmatched_rows.push_back(i);
  }
  for (int j = 0; j < cols; ++j) {
    if (!col_matched[j]) out.unmatched_cols.push_back(j);
  }
  return out;
}

}  // namespace sut
