// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace vdit {

/// Dense row-major cost matrix.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  CostMatrix() = default;
  CostMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

/// Optimal one-to-one assignment of min(rows, cols) (row, col) pairs.
struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (query, gt), sorted by query
  double cost = 0;
};

/// Minimum-cost assignment (Kuhn-Munkres with shortest augmenting paths).
/// Rejects NaN entries.
Assignment hungarian_match(const CostMatrix& cost);

}  // namespace vdit
