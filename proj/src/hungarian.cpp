// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#include "vdit/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vdit/error.hpp"

namespace vdit {

namespace {

// Assigns every row of an n x m matrix (n <= m) to a distinct column.
// Returns col_of_row.
std::vector<std::size_t> solve_rows(std::size_t n, std::size_t m,
                                    const std::vector<double>& a) {
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> row_of_col(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = row_of_col[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> col_of_row(n, 0);
  for (std::size_t j = 1; j <= m; ++j)
    if (row_of_col[j] != 0) col_of_row[row_of_col[j] - 1] = j - 1;
  return col_of_row;
}

}  // namespace

Assignment hungarian_match(const CostMatrix& cost) {
  VDIT_REQUIRE(cost.values.size() == cost.rows * cost.cols, ErrorKind::ShapeMismatch, "cost",
               "cost matrix storage does not match its shape");
  for (std::size_t i = 0; i < cost.values.size(); ++i)
    VDIT_REQUIRE(!std::isnan(cost.values[i]), ErrorKind::InvalidArgument,
                 "entry " + std::to_string(i), "NaN in cost matrix");

  Assignment out;
  if (cost.rows == 0 || cost.cols == 0) return out;

  if (cost.rows <= cost.cols) {
    const auto cols = solve_rows(cost.rows, cost.cols, cost.values);
    for (std::size_t r = 0; r < cost.rows; ++r) out.pairs.emplace_back(r, cols[r]);
  } else {
    std::vector<double> t(cost.rows * cost.cols);
    for (std::size_t r = 0; r < cost.rows; ++r)
      for (std::size_t c = 0; c < cost.cols; ++c) t[c * cost.rows + r] = cost(r, c);
    const auto rows = solve_rows(cost.cols, cost.rows, t);
    for (std::size_t c = 0; c < cost.cols; ++c) out.pairs.emplace_back(rows[c], c);
    std::sort(out.pairs.begin(), out.pairs.end());
  }
  for (const auto& [r, c] : out.pairs) out.cost += cost(r, c);
  return out;
}

}  // namespace vdit
