#pragma once

#include <Eigen/Dense>
#include <limits>
#include <utility>
#include <vector>

namespace smctrack {

/// Rectangular assignment cost matrix. Gated (infeasible) pairs carry
/// kInfeasible; all other entries must be finite.
struct CostMatrix {
  static constexpr double kInfeasible = std::numeric_limits<double>::infinity();

  Eigen::MatrixXd values;

  CostMatrix() = default;
  explicit CostMatrix(Eigen::MatrixXd v) : values(std::move(v)) {}

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

struct AssignmentResult {
  std::vector<std::pair<int, int>> matches;  // (row, col), sorted by row
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
  double total_cost = 0.0;  // sum of matched entries, accumulated in row order
};

/// Minimum-cost maximum-cardinality matching over the feasible pairs.
/// A pair is feasible when its entry is finite and <= max_cost; everything
/// else is excluded up front and reported unmatched.
AssignmentResult hungarian_solve(const CostMatrix& cost,
                                 double max_cost = std::numeric_limits<double>::infinity());

}  // namespace smctrack
