// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "nodecomm/pattern.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nodecomm/error.hpp"

namespace nodecomm
{

CommPattern::CommPattern(std::size_t nprocs, std::vector<Message> messages)
  : nprocs_(nprocs), messages_(std::move(messages))
{
  for (const auto &m : messages_)
  {
    if (m.src >= nprocs_ || m.dst >= nprocs_)
    {
      throw PatternError("message " + std::to_string(m.src) + "->" + std::to_string(m.dst) +
                         " references a rank outside [0, " + std::to_string(nprocs_) + ")");
    }
    if (m.src == m.dst)
    {
      throw PatternError("message from rank " + std::to_string(m.src) + " to itself");
    }
    if (m.size == 0)
    {
      throw PatternError("zero-byte message " + std::to_string(m.src) + "->" +
                         std::to_string(m.dst));
    }
  }
  std::stable_sort(messages_.begin(), messages_.end(), [](const Message &a, const Message &b) {
    return a.dst != b.dst ? a.dst < b.dst : a.src < b.src;
  });
  recv_offsets_.assign(nprocs_ + 1, 0);
  for (const auto &m : messages_)
  {
    ++recv_offsets_[m.dst + 1];
  }
  for (std::size_t p = 0; p < nprocs_; ++p)
  {
    recv_offsets_[p + 1] += recv_offsets_[p];
  }
}

std::span<const Message> CommPattern::received_by(Rank rank) const
{
  if (rank >= nprocs_)
  {
    throw PatternError("rank " + std::to_string(rank) + " outside pattern");
  }
  return std::span<const Message>(messages_).subspan(
    recv_offsets_[rank], recv_offsets_[rank + 1] - recv_offsets_[rank]);
}

std::vector<std::size_t> CommPattern::receive_counts() const
{
  std::vector<std::size_t> counts(nprocs_);
  for (std::size_t p = 0; p < nprocs_; ++p)
  {
    counts[p] = recv_offsets_[p + 1] - recv_offsets_[p];
  }
  return counts;
}

std::vector<Bytes> inter_node_bytes_sent(const CommPattern &pattern, const RankLayout &layout)
{
  std::vector<Bytes> sent(pattern.nprocs(), 0);
  for (const auto &m : pattern.messages())
  {
    if (locality(m.src, m.dst, layout) == Locality::InterNode)
    {
      sent[m.src] += m.size;
    }
  }
  return sent;
}

CommPattern load_pattern(std::string_view text)
{
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> nprocs;
  std::vector<Message> messages;
  while (std::getline(in, line))
  {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
    {
      line.erase(hash);
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos)
    {
      continue;
    }
    std::istringstream fields(line);
    std::string extra;
    if (!nprocs)
    {
      std::string keyword;
      long long n = 0;
      if (!(fields >> keyword >> n) || keyword != "nprocs" || n <= 0 || (fields >> extra))
      {
        throw ParseError(line_no, "expected header `nprocs N` with N >= 1");
      }
      nprocs = static_cast<std::size_t>(n);
      continue;
    }
    long long src = 0;
    long long dst = 0;
    long long size = 0;
    if (!(fields >> src >> dst >> size) || (fields >> extra))
    {
      throw ParseError(line_no, "expected `src dst size`");
    }
    if (src < 0 || dst < 0 || static_cast<std::size_t>(src) >= *nprocs ||
        static_cast<std::size_t>(dst) >= *nprocs)
    {
      throw ParseError(line_no, "rank outside [0, " + std::to_string(*nprocs) + ")");
    }
    if (src == dst)
    {
      throw ParseError(line_no, "message from a rank to itself");
    }
    if (size < 1)
    {
      throw ParseError(line_no, "message size must be at least 1 byte");
    }
    messages.push_back(
      Message{static_cast<Rank>(src), static_cast<Rank>(dst), static_cast<Bytes>(size)});
  }
  if (!nprocs)
  {
    throw ParseError(0, "trace has no `nprocs N` header");
  }
  return CommPattern(*nprocs, std::move(messages));
}

std::string save_pattern(const CommPattern &pattern)
{
  std::ostringstream out;
  out << "nprocs " << pattern.nprocs() << '\n';
  for (const auto &m : pattern.messages())
  {
    out << m.src << ' ' << m.dst << ' ' << m.size << '\n';
  }
  return out.str();
}

std::string pattern_summary(const CommPattern &pattern, const RankLayout &layout)
{
  using json = nlohmann::ordered_json;
  if (pattern.nprocs() > layout.nprocs())
  {
    throw PatternError("pattern has more ranks than the layout");
  }
  json totals = json::object();
  std::array<Bytes, 3> all{};
  json procs = json::array();
  for (Rank p = 0; p < pattern.nprocs(); ++p)
  {
    std::array<Bytes, 3> bytes{};
    const auto recv = pattern.received_by(p);
    for (const auto &m : recv)
    {
      bytes[static_cast<std::size_t>(locality(m.src, m.dst, layout))] += m.size;
    }
    json by_locality = json::object();
    for (auto l : kLocalities)
    {
      by_locality[std::string(to_string(l))] = bytes[static_cast<std::size_t>(l)];
      all[static_cast<std::size_t>(l)] += bytes[static_cast<std::size_t>(l)];
    }
    procs.push_back(json{{"rank", p}, {"recv_count", recv.size()}, {"recv_bytes", by_locality}});
  }
  for (auto l : kLocalities)
  {
    totals[std::string(to_string(l))] = all[static_cast<std::size_t>(l)];
  }
  json doc{{"nprocs", pattern.nprocs()},
           {"messages", pattern.messages().size()},
           {"bytes", totals},
           {"processes", procs}};
  return doc.dump(2) + "\n";
}

std::vector<std::uint64_t> block_offsets(std::uint64_t n, std::size_t nprocs)
{
  if (nprocs == 0)
  {
    throw PatternError("process count must be at least 1");
  }
  std::vector<std::uint64_t> starts(nprocs + 1, 0);
  const std::uint64_t base = n / nprocs;
  const std::uint64_t extra = n % nprocs;
  for (std::size_t p = 0; p < nprocs; ++p)
  {
    starts[p + 1] = starts[p] + base + (p < extra ? 1 : 0);
  }
  return starts;
}

namespace
{

void check_offsets(const std::vector<std::uint64_t> &starts, std::uint64_t n, const char *what)
{
  if (starts.size() < 2 || starts.front() != 0 || starts.back() != n ||
      !std::is_sorted(starts.begin(), starts.end()))
  {
    throw PatternError(std::string(what) + " offsets do not partition the index range");
  }
}

Rank owner_of(std::span<const std::uint64_t> starts, std::uint64_t index)
{
  const auto it = std::upper_bound(starts.begin(), starts.end(), index);
  return static_cast<Rank>(std::distance(starts.begin(), it) - 1);
}

}  // namespace

SparseMatrixPartition::SparseMatrixPartition(std::uint64_t rows, std::uint64_t cols,
                                             std::vector<MatrixEntry> entries,
                                             std::vector<std::uint64_t> row_starts,
                                             std::vector<std::uint64_t> col_starts,
                                             Bytes bytes_per_value, Bytes bytes_per_index)
  : rows_(rows), cols_(cols), row_starts_(std::move(row_starts)),
    col_starts_(std::move(col_starts)), bytes_per_value_(bytes_per_value),
    bytes_per_index_(bytes_per_index)
{
  check_offsets(row_starts_, rows_, "row");
  check_offsets(col_starts_, cols_, "column");
  if (row_starts_.size() != col_starts_.size())
  {
    throw PatternError("row and column partitions use different process counts");
  }
  for (const auto &e : entries)
  {
    if (e.row >= rows_ || e.col >= cols_)
    {
      throw PatternError("nonzero (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                         ") outside a " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                         " matrix");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const MatrixEntry &a, const MatrixEntry &b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(rows_ + 1, 0);
  for (std::size_t i = 0; i < entries.size(); ++i)
  {
    const auto &e = entries[i];
    if (i > 0 && entries[i - 1].row == e.row && entries[i - 1].col == e.col)
    {
      values_.back() += e.value;
      continue;
    }
    col_idx_.push_back(e.col);
    values_.push_back(e.value);
    ++row_ptr_[e.row + 1];
  }
  for (std::uint64_t r = 0; r < rows_; ++r)
  {
    row_ptr_[r + 1] += row_ptr_[r];
  }
}

SparseMatrixPartition SparseMatrixPartition::block_rows(std::uint64_t rows, std::uint64_t cols,
                                                        std::vector<MatrixEntry> entries,
                                                        std::size_t nprocs,
                                                        Bytes bytes_per_value,
                                                        Bytes bytes_per_index)
{
  return SparseMatrixPartition(rows, cols, std::move(entries), block_offsets(rows, nprocs),
                               block_offsets(cols, nprocs), bytes_per_value, bytes_per_index);
}

std::span<const std::uint64_t> SparseMatrixPartition::row_cols(std::uint64_t row) const
{
  return std::span<const std::uint64_t>(col_idx_).subspan(row_ptr_[row],
                                                          row_ptr_[row + 1] - row_ptr_[row]);
}

Rank SparseMatrixPartition::row_owner(std::uint64_t row) const
{
  return owner_of(row_starts_, row);
}

Rank SparseMatrixPartition::col_owner(std::uint64_t col) const
{
  return owner_of(col_starts_, col);
}

namespace
{

// Distinct off-process columns referenced by rank p's rows, sorted.
std::vector<std::uint64_t> remote_columns(const SparseMatrixPartition &a, Rank p,
                                          std::span<const std::uint64_t> owner_starts)
{
  const auto starts = a.row_starts();
  const std::uint64_t lo = owner_starts[p];
  const std::uint64_t hi = owner_starts[p + 1];
  std::vector<std::uint64_t> cols;
  for (std::uint64_t r = starts[p]; r < starts[p + 1]; ++r)
  {
    for (auto c : a.row_cols(r))
    {
      if (c < lo || c >= hi)
      {
        cols.push_back(c);
      }
    }
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  return cols;
}

template <typename SizeOf>
std::vector<Message> group_by_owner(Rank p, const std::vector<std::uint64_t> &indices,
                                    std::span<const std::uint64_t> owner_starts, SizeOf size_of)
{
  std::vector<Message> out;
  for (auto idx : indices)
  {
    const Rank q = owner_of(owner_starts, idx);
    const Bytes bytes = size_of(idx);
    if (!out.empty() && out.back().src == q)
    {
      out.back().size += bytes;
    }
    else
    {
      out.push_back(Message{q, p, bytes});
    }
  }
  std::erase_if(out, [](const Message &m) { return m.size == 0; });
  return out;
}

CommPattern merge(std::size_t nprocs, std::vector<std::vector<Message>> &per_process)
{
  std::size_t total = 0;
  for (const auto &v : per_process)
  {
    total += v.size();
  }
  std::vector<Message> messages;
  messages.reserve(total);
  for (auto &v : per_process)
  {
    messages.insert(messages.end(), v.begin(), v.end());
  }
  return CommPattern(nprocs, std::move(messages));
}

void check_spgemm_shapes(const SparseMatrixPartition &a, const SparseMatrixPartition &b)
{
  if (a.cols() != b.rows())
  {
    throw PatternError("dimension mismatch: A has " + std::to_string(a.cols()) +
                       " columns but B has " + std::to_string(b.rows()) + " rows");
  }
  if (a.nprocs() != b.nprocs())
  {
    throw PatternError("A and B are distributed over different process counts");
  }
}

}  // namespace

CommPattern spmv_pattern(const SparseMatrixPartition &a)
{
  const auto nprocs = a.nprocs();
  std::vector<std::vector<Message>> per_process(nprocs);
  const auto bytes = a.bytes_per_value();
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t p = 0; p < nprocs; ++p)
  {
    const auto cols = remote_columns(a, static_cast<Rank>(p), a.col_starts());
    per_process[p] = group_by_owner(static_cast<Rank>(p), cols, a.col_starts(),
                                    [bytes](std::uint64_t) { return bytes; });
  }
  return merge(nprocs, per_process);
}

CommPattern spgemm_pattern(const SparseMatrixPartition &a, const SparseMatrixPartition &b)
{
  check_spgemm_shapes(a, b);
  const auto nprocs = a.nprocs();
  std::vector<std::vector<Message>> per_process(nprocs);
  const Bytes per_nonzero = b.bytes_per_value() + b.bytes_per_index();
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t p = 0; p < nprocs; ++p)
  {
    const auto rows = remote_columns(a, static_cast<Rank>(p), b.row_starts());
    per_process[p] =
      group_by_owner(static_cast<Rank>(p), rows, b.row_starts(),
                     [&b, per_nonzero](std::uint64_t j) { return b.row_nnz(j) * per_nonzero; });
  }
  return merge(nprocs, per_process);
}

namespace serial
{

CommPattern spmv_pattern(const SparseMatrixPartition &a)
{
  std::map<std::pair<Rank, Rank>, std::set<std::uint64_t>> needed;  // (dst, src) -> columns
  for (std::uint64_t r = 0; r < a.rows(); ++r)
  {
    const Rank p = a.row_owner(r);
    for (auto c : a.row_cols(r))
    {
      const Rank q = a.col_owner(c);
      if (q != p)
      {
        needed[{p, q}].insert(c);
      }
    }
  }
  std::vector<Message> messages;
  for (const auto &[key, cols] : needed)
  {
    messages.push_back(Message{key.second, key.first, cols.size() * a.bytes_per_value()});
  }
  return CommPattern(a.nprocs(), std::move(messages));
}

CommPattern spgemm_pattern(const SparseMatrixPartition &a, const SparseMatrixPartition &b)
{
  check_spgemm_shapes(a, b);
  std::map<std::pair<Rank, Rank>, std::set<std::uint64_t>> fetched;  // (dst, src) -> rows of B
  for (std::uint64_t r = 0; r < a.rows(); ++r)
  {
    const Rank p = a.row_owner(r);
    for (auto j : a.row_cols(r))
    {
      const Rank q = b.row_owner(j);
      if (q != p)
      {
        fetched[{p, q}].insert(j);
      }
    }
  }
  std::vector<Message> messages;
  const Bytes per_nonzero = b.bytes_per_value() + b.bytes_per_index();
  for (const auto &[key, rows] : fetched)
  {
    Bytes size = 0;
    for (auto j : rows)
    {
      size += b.row_nnz(j) * per_nonzero;
    }
    if (size > 0)
    {
      messages.push_back(Message{key.second, key.first, size});
    }
  }
  return CommPattern(a.nprocs(), std::move(messages));
}

}  // namespace serial

}  // namespace nodecomm
