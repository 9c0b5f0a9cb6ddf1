#include "smctrack/hungarian.hpp"

#include <algorithm>
#include <cmath>

namespace smctrack {

namespace {

bool feasible_entry(double value, double max_cost) {
  return std::isfinite(value) && value <= max_cost;
}

}  // namespace

AssignmentResult hungarian_solve(const CostMatrix& cost, double max_cost) {
  const int rows = cost.rows();
  const int cols = cost.cols();

  AssignmentResult result;
  if (rows == 0 || cols == 0) {
    for (int i = 0; i < rows; ++i) result.unmatched_rows.push_back(i);
    for (int j = 0; j < cols; ++j) result.unmatched_cols.push_back(j);
    return result;
  }

  // Square instance: real entries, a big-M for gated pairs (forces maximum
  // feasible cardinality), and zero-cost dummy rows/cols for the padding.
  const int n = std::max(rows, cols);
  double max_abs = 0.0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (feasible_entry(cost.values(i, j), max_cost)) {
        max_abs = std::max(max_abs, std::abs(cost.values(i, j)));
      }
    }
  }
  const double big = (max_abs + 1.0) * (n + 1);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      a(i, j) = feasible_entry(cost.values(i, j), max_cost) ? cost.values(i, j) : big;
    }
  }

  // Potentials-based shortest augmenting path (1-indexed bookkeeping).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> assigned_row(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    assigned_row[0] = i;
    int j0 = 0;
    std::vector<double> min_reduced(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = assigned_row[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < min_reduced[j]) {
          min_reduced[j] = cur;
          way[j] = j0;
        }
        if (min_reduced[j] < delta) {
          delta = min_reduced[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[assigned_row[j]] += delta;
          v[j] -= delta;
        } else {
          min_reduced[j] -= delta;
        }
      }
      j0 = j1;
    } while (assigned_row[j0] != 0);
    do {
      const int j1 = way[j0];
      assigned_row[j0] = assigned_row[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(rows, -1);
  for (int j = 1; j <= n; ++j) {
    const int i = assigned_row[j] - 1;
    if (i >= 0 && i < rows && j - 1 < cols) {
      row_to_col[i] = j - 1;
    }
  }

  std::vector<bool> col_matched(cols, false);
  for (int i = 0; i < rows; ++i) {
    const int j = row_to_col[i];
    if (j >= 0 && feasible_entry(cost.values(i, j), max_cost)) {
      result.matches.emplace_back(i, j);
      result.total_cost += cost.values(i, j);
      col_matched[j] = true;
    } else {
      result.unmatched_rows.push_back(i);
    }
  }
  for (int j = 0; j < cols; ++j) {
    if (!col_matched[j]) result.unmatched_cols.push_back(j);
  }
  return result;
}

}  // namespace smctrack
