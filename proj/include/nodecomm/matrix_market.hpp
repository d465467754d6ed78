// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "nodecomm/pattern.hpp"

namespace nodecomm
{

struct MatrixMarketData
{
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::vector<MatrixEntry> entries;  // 0-based, symmetric storage already mirrored
};

/// Coordinate format only; `general` or `symmetric`; real, integer or pattern
/// fields (pattern entries get value 1). Throws ParseError with the line number.
MatrixMarketData parse_matrix_market(std::string_view text);

/// Parses and splits rows (and columns) into nprocs near-equal contiguous blocks.
SparseMatrixPartition load_matrix(std::string_view text, std::size_t nprocs);

}  // namespace nodecomm
