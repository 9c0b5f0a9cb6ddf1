#include <doctest.h>

#include <algorithm>
#include <set>

#include "smctrack/hungarian.hpp"
#include "smctrack/oracle.hpp"
#include "smctrack/random.hpp"

using namespace smctrack;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform();
  return m;
}

std::set<std::pair<int, int>> match_set(const AssignmentResult& r) {
  return {r.matches.begin(), r.matches.end()};
}

}  // namespace

TEST_CASE("zero-cost diagonal under a cap") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Ones(3, 3);
  m.diagonal().setZero();
  const auto result = hungarian_solve(CostMatrix(m), 0.5);
  CHECK(match_set(result) == std::set<std::pair<int, int>>{{0, 0}, {1, 1}, {2, 2}});
  CHECK(result.total_cost == 0.0);
  CHECK(result.unmatched_rows.empty());
  CHECK(result.unmatched_cols.empty());
}

TEST_CASE("single row picks the cheaper feasible column") {
  Eigen::MatrixXd m(1, 2);
  m << 0.3, 0.1;
  const auto result = hungarian_solve(CostMatrix(m), 0.2);
  CHECK(match_set(result) == std::set<std::pair<int, int>>{{0, 1}});
  CHECK(result.unmatched_cols == std::vector<int>{0});
}

TEST_CASE("empty matrices leave everything unmatched") {
  const auto none = hungarian_solve(CostMatrix(Eigen::MatrixXd(0, 0)));
  CHECK(none.matches.empty());

  const auto cols_only = hungarian_solve(CostMatrix(Eigen::MatrixXd(0, 3)));
  CHECK(cols_only.unmatched_cols == std::vector<int>{0, 1, 2});

  const auto rows_only = hungarian_solve(CostMatrix(Eigen::MatrixXd(2, 0)));
  CHECK(rows_only.unmatched_rows == std::vector<int>{0, 1});
}

TEST_CASE("square matrices match exhaustive search exactly") {
  Rng rng(31337);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 7));
    const CostMatrix cost(random_matrix(rng, n, n));
    const auto fast = hungarian_solve(cost);
    const auto slow = oracle::brute_force_assignment(cost);
    CHECK(fast.matches.size() == static_cast<std::size_t>(n));
    CHECK(fast.total_cost == slow.total_cost);
  }
}

TEST_CASE("rectangular matrices match exhaustive search exactly") {
  Rng rng(808);
  for (int trial = 0; trial < 100; ++trial) {
    const int rows = static_cast<int>(rng.uniform_int(1, 6));
    const int cols = static_cast<int>(rng.uniform_int(1, 7));
    const CostMatrix cost(random_matrix(rng, rows, cols));
    const auto fast = hungarian_solve(cost);
    const auto slow = oracle::brute_force_assignment(cost);
    CHECK(fast.matches.size() == static_cast<std::size_t>(std::min(rows, cols)));
    CHECK(fast.total_cost == slow.total_cost);
  }
}

TEST_CASE("negative costs are handled optimally") {
  Rng rng(1212);
  for (int trial = 0; trial < 60; ++trial) {
    const int rows = static_cast<int>(rng.uniform_int(1, 6));
    const int cols = static_cast<int>(rng.uniform_int(1, 6));
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform(-2.0, 1.0);
    const auto fast = hungarian_solve(CostMatrix(m));
    const auto slow = oracle::brute_force_assignment(CostMatrix(m));
    CHECK(fast.matches.size() == slow.matches.size());
    CHECK(fast.total_cost == doctest::Approx(slow.total_cost).epsilon(1e-12));
  }
}

TEST_CASE("gated instances keep optimality over the feasible sub-problem") {
  Rng rng(909);
  for (int trial = 0; trial < 150; ++trial) {
    const int rows = static_cast<int>(rng.uniform_int(1, 6));
    const int cols = static_cast<int>(rng.uniform_int(1, 6));
    Eigen::MatrixXd m = random_matrix(rng, rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if (rng.bernoulli(0.25)) m(i) = CostMatrix::kInfeasible;
    }
    const double cap = rng.bernoulli(0.5) ? rng.uniform(0.2, 0.9)
                                          : CostMatrix::kInfeasible;
    const auto fast = hungarian_solve(CostMatrix(m), cap);
    const auto slow = oracle::brute_force_assignment(CostMatrix(m), cap);
    CHECK(fast.matches.size() == slow.matches.size());
    CHECK(fast.total_cost == doctest::Approx(slow.total_cost).epsilon(1e-12));
    for (const auto& [i, j] : fast.matches) {
      CHECK(m(i, j) <= cap);
    }
  }
}

TEST_CASE("pre-gating capped pairs reproduces the capped solve") {
  Rng rng(4242);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(2, 6));
    const Eigen::MatrixXd m = random_matrix(rng, n, n);
    const double cap = rng.uniform(0.2, 0.8);

    Eigen::MatrixXd gated = m;
    for (Eigen::Index i = 0; i < gated.size(); ++i) {
      if (gated(i) > cap) gated(i) = CostMatrix::kInfeasible;
    }
    const auto capped = hungarian_solve(CostMatrix(m), cap);
    const auto pre_gated = hungarian_solve(CostMatrix(gated));
    CHECK(match_set(capped) == match_set(pre_gated));
  }
}

TEST_CASE("permuting the input permutes the matching") {
  Rng rng(555);
  const int n = 5;
  const Eigen::MatrixXd m = random_matrix(rng, n, n);
  const auto base = hungarian_solve(CostMatrix(m));

  std::vector<int> row_perm{2, 0, 4, 1, 3};
  std::vector<int> col_perm{4, 2, 0, 3, 1};
  Eigen::MatrixXd permuted(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      permuted(i, j) = m(row_perm[static_cast<std::size_t>(i)],
                         col_perm[static_cast<std::size_t>(j)]);
    }
  }
  const auto permuted_result = hungarian_solve(CostMatrix(permuted));

  std::set<std::pair<int, int>> mapped;
  for (const auto& [i, j] : permuted_result.matches) {
    mapped.emplace(row_perm[static_cast<std::size_t>(i)],
                   col_perm[static_cast<std::size_t>(j)]);
  }
  CHECK(mapped == match_set(base));
}

TEST_CASE("constant shifts do not change the argmin matching") {
  Rng rng(666);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(2, 6));
    const Eigen::MatrixXd m = random_matrix(rng, n, n);
    const double shift = rng.uniform(-5.0, 5.0);
    const auto base = hungarian_solve(CostMatrix(m));
    const auto shifted = hungarian_solve(CostMatrix((m.array() + shift).matrix()));
    CHECK(match_set(base) == match_set(shifted));
  }
}

TEST_CASE("matches and unmatched sets partition both index sets") {
  Rng rng(777);
  for (int trial = 0; trial < 50; ++trial) {
    const int rows = static_cast<int>(rng.uniform_int(1, 7));
    const int cols = static_cast<int>(rng.uniform_int(1, 7));
    Eigen::MatrixXd m = random_matrix(rng, rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if (rng.bernoulli(0.3)) m(i) = CostMatrix::kInfeasible;
    }
    const auto result = hungarian_solve(CostMatrix(m), 0.7);

    std::set<int> seen_rows, seen_cols;
    for (const auto& [i, j] : result.matches) {
      CHECK(seen_rows.insert(i).second);
      CHECK(seen_cols.insert(j).second);
    }
    for (int i : result.unmatched_rows) CHECK(seen_rows.insert(i).second);
    for (int j : result.unmatched_cols) CHECK(seen_cols.insert(j).second);
    CHECK(seen_rows.size() == static_cast<std::size_t>(rows));
    CHECK(seen_cols.size() == static_cast<std::size_t>(cols));
  }
}
