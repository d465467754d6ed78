// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nodecomm
{

/// Weighted linear least squares: minimizes sum_i w_i (y_i - row_i . x)^2 for
/// a row-major design with `columns` columns. Columns are rescaled before a
/// column-pivoted QR; throws FitError when the design is rank deficient.
/// Empty `weights` means unit weights.
std::vector<double> least_squares(std::span<const double> design, std::size_t columns,
                                  std::span<const double> y, std::span<const double> weights = {});

}  // namespace nodecomm
