// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "nodecomm/least_squares.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "nodecomm/error.hpp"

namespace nodecomm
{

std::vector<double> least_squares(std::span<const double> design, std::size_t columns,
                                  std::span<const double> y, std::span<const double> weights)
{
  const std::size_t rows = y.size();
  if (columns == 0 || design.size() != rows * columns)
  {
    throw FitError("design matrix shape does not match the observations");
  }
  if (!weights.empty() && weights.size() != rows)
  {
    throw FitError("one weight per observation required");
  }
  if (rows < columns)
  {
    throw FitError("rank deficient: " + std::to_string(rows) + " observations for " +
                   std::to_string(columns) + " unknowns");
  }
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Matrix a = Eigen::Map<const Matrix>(design.data(), static_cast<Eigen::Index>(rows),
                                      static_cast<Eigen::Index>(columns));
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(rows));
  if (!weights.empty())
  {
    for (std::size_t i = 0; i < rows; ++i)
    {
      const double root = std::sqrt(weights[i]);
      a.row(static_cast<Eigen::Index>(i)) *= root;
      b(static_cast<Eigen::Index>(i)) *= root;
    }
  }
  Eigen::VectorXd scale(static_cast<Eigen::Index>(columns));
  for (Eigen::Index j = 0; j < a.cols(); ++j)
  {
    scale(j) = a.col(j).norm();
    if (scale(j) == 0.0)
    {
      throw FitError("rank deficient: regressor " + std::to_string(j) + " is identically zero");
    }
    a.col(j) /= scale(j);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(columns))
  {
    throw FitError("rank deficient: regressors are collinear");
  }
  const Eigen::VectorXd x = qr.solve(b);
  std::vector<double> out(columns);
  for (std::size_t j = 0; j < columns; ++j)
  {
    out[j] = x(static_cast<Eigen::Index>(j)) / scale(static_cast<Eigen::Index>(j));
  }
  return out;
}

}  // namespace nodecomm
