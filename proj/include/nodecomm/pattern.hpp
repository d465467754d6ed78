// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nodecomm/params.hpp"
#include "nodecomm/topology.hpp"

namespace nodecomm
{

struct Message
{
  Rank src = 0;
  Rank dst = 0;
  Bytes size = 0;

  auto operator<=>(const Message &) const = default;
};

/// The point-to-point messages of one communication phase. Messages are kept
/// sorted by (dst, src), stable for duplicates, so each process's receives
/// form a contiguous run.
class CommPattern
{
public:
  CommPattern() = default;
  /// Throws PatternError on src == dst, zero-byte messages or ranks >= nprocs.
  CommPattern(std::size_t nprocs, std::vector<Message> messages);

  std::size_t nprocs() const noexcept { return nprocs_; }
  std::span<const Message> messages() const noexcept { return messages_; }
  bool empty() const noexcept { return messages_.empty(); }

  std::span<const Message> received_by(Rank rank) const;
  std::size_t receive_count(Rank rank) const { return received_by(rank).size(); }
  std::vector<std::size_t> receive_counts() const;

  bool operator==(const CommPattern &) const = default;

private:
  std::size_t nprocs_ = 0;
  std::vector<Message> messages_;
  std::vector<std::size_t> recv_offsets_{0};
};

/// Off-node bytes sent by each rank.
std::vector<Bytes> inter_node_bytes_sent(const CommPattern &pattern, const RankLayout &layout);

/// Trace document: `nprocs N`, then one `src dst size` per line. `#` comments
/// and blank lines are ignored; duplicate entries stay separate messages.
CommPattern load_pattern(std::string_view text);
std::string save_pattern(const CommPattern &pattern);

/// JSON listing per-process receive counts and received bytes by locality.
std::string pattern_summary(const CommPattern &pattern, const RankLayout &layout);

struct MatrixEntry
{
  std::uint64_t row = 0;
  std::uint64_t col = 0;
  double value = 0.0;
};

/// A sparse matrix distributed by contiguous row blocks. Columns (the vector
/// space an SpMV reads from) are distributed by their own contiguous blocks;
/// by default they follow the same near-equal split as the rows.
class SparseMatrixPartition
{
public:
  /// `row_starts` and `col_starts` hold nprocs + 1 monotone offsets covering
  /// [0, rows) and [0, cols). Duplicate coordinates are kept once (values summed).
  SparseMatrixPartition(std::uint64_t rows, std::uint64_t cols, std::vector<MatrixEntry> entries,
                        std::vector<std::uint64_t> row_starts,
                        std::vector<std::uint64_t> col_starts, Bytes bytes_per_value = 8,
                        Bytes bytes_per_index = 4);

  /// Near-equal contiguous blocks; the first (n mod nprocs) processes get one extra.
  static SparseMatrixPartition block_rows(std::uint64_t rows, std::uint64_t cols,
                                          std::vector<MatrixEntry> entries, std::size_t nprocs,
                                          Bytes bytes_per_value = 8, Bytes bytes_per_index = 4);

  std::uint64_t rows() const noexcept { return rows_; }
  std::uint64_t cols() const noexcept { return cols_; }
  std::size_t nprocs() const noexcept { return row_starts_.size() - 1; }
  std::size_t nnz() const noexcept { return col_idx_.size(); }
  Bytes bytes_per_value() const noexcept { return bytes_per_value_; }
  Bytes bytes_per_index() const noexcept { return bytes_per_index_; }

  std::span<const std::uint64_t> row_starts() const noexcept { return row_starts_; }
  std::span<const std::uint64_t> col_starts() const noexcept { return col_starts_; }

  /// Sorted, de-duplicated column indices of one row.
  std::span<const std::uint64_t> row_cols(std::uint64_t row) const;
  std::size_t row_nnz(std::uint64_t row) const { return row_cols(row).size(); }

  Rank row_owner(std::uint64_t row) const;
  Rank col_owner(std::uint64_t col) const;

private:
  std::uint64_t rows_;
  std::uint64_t cols_;
  std::vector<std::uint64_t> row_ptr_;
  std::vector<std::uint64_t> col_idx_;
  std::vector<double> values_;
  std::vector<std::uint64_t> row_starts_;
  std::vector<std::uint64_t> col_starts_;
  Bytes bytes_per_value_;
  Bytes bytes_per_index_;
};

/// Near-equal contiguous split of [0, n) into nprocs blocks.
std::vector<std::uint64_t> block_offsets(std::uint64_t n, std::size_t nprocs);

/// Halo exchange of y = A x: owner q of any off-process column referenced by
/// rank p's rows sends p one value per distinct such column.
CommPattern spmv_pattern(const SparseMatrixPartition &a);

/// Row-wise C = A B, fetch phase: rank p receives every remote row of B named
/// by a column of its rows of A, once, from that row's owner. Each fetched
/// nonzero costs bytes_per_value + bytes_per_index of B. Fetches of rows with
/// no nonzeros carry no payload and send no message.
CommPattern spgemm_pattern(const SparseMatrixPartition &a, const SparseMatrixPartition &b);

namespace serial
{
CommPattern spmv_pattern(const SparseMatrixPartition &a);
CommPattern spgemm_pattern(const SparseMatrixPartition &a, const SparseMatrixPartition &b);
}  // namespace serial

}  // namespace nodecomm
