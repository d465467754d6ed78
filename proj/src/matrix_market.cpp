// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "nodecomm/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <string>

#include "nodecomm/error.hpp"

namespace nodecomm
{

namespace
{

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool blank(const std::string &line)
{
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

MatrixMarketData parse_matrix_market(std::string_view text)
{
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line))
  {
    throw ParseError(1, "empty Matrix Market document");
  }
  ++line_no;
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix")
  {
    throw ParseError(line_no, "missing `%%MatrixMarket matrix` banner");
  }
  if (lower(format) != "coordinate")
  {
    throw ParseError(line_no, "only coordinate format is supported, got `" + format + "`");
  }
  field = lower(field);
  if (field != "real" && field != "integer" && field != "pattern")
  {
    throw ParseError(line_no, "unsupported field `" + field + "`");
  }
  symmetry = lower(symmetry);
  if (symmetry != "general" && symmetry != "symmetric")
  {
    throw ParseError(line_no, "unsupported symmetry `" + symmetry + "`");
  }
  const bool is_pattern = field == "pattern";
  const bool is_symmetric = symmetry == "symmetric";

  MatrixMarketData data;
  std::uint64_t declared = 0;
  bool have_size = false;
  std::uint64_t read = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    if (blank(line) || line.front() == '%')
    {
      continue;
    }
    std::istringstream fields(line);
    std::string extra;
    if (!have_size)
    {
      long long rows = 0, cols = 0, nnz = 0;
      if (!(fields >> rows >> cols >> nnz) || (fields >> extra) || rows < 0 || cols < 0 ||
          nnz < 0)
      {
        throw ParseError(line_no, "expected `rows cols nonzeros`");
      }
      if (is_symmetric && rows != cols)
      {
        throw ParseError(line_no, "symmetric matrix must be square");
      }
      data.rows = static_cast<std::uint64_t>(rows);
      data.cols = static_cast<std::uint64_t>(cols);
      declared = static_cast<std::uint64_t>(nnz);
      have_size = true;
      data.entries.reserve(is_symmetric ? 2 * declared : declared);
      continue;
    }
    long long i = 0, j = 0;
    double value = 1.0;
    if (!(fields >> i >> j) || (!is_pattern && !(fields >> value)) || (fields >> extra))
    {
      throw ParseError(line_no, is_pattern ? "expected `row col`" : "expected `row col value`");
    }
    if (i < 1 || j < 1 || static_cast<std::uint64_t>(i) > data.rows ||
        static_cast<std::uint64_t>(j) > data.cols)
    {
      throw ParseError(line_no, "entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                  ") outside the declared dimensions");
    }
    if (read == declared)
    {
      throw ParseError(line_no, "more entries than declared");
    }
    ++read;
    const auto r = static_cast<std::uint64_t>(i - 1);
    const auto c = static_cast<std::uint64_t>(j - 1);
    data.entries.push_back(MatrixEntry{r, c, value});
    if (is_symmetric && r != c)
    {
      data.entries.push_back(MatrixEntry{c, r, value});
    }
  }
  if (!have_size)
  {
    throw ParseError(line_no, "missing size line");
  }
  if (read != declared)
  {
    throw ParseError(line_no, "expected " + std::to_string(declared) + " entries, found " +
                                std::to_string(read));
  }
  return data;
}

SparseMatrixPartition load_matrix(std::string_view text, std::size_t nprocs)
{
  auto data = parse_matrix_market(text);
  return SparseMatrixPartition::block_rows(data.rows, data.cols, std::move(data.entries), nprocs);
}

}  // namespace nodecomm
