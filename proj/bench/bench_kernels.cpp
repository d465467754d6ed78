// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference vs OpenMP kernels on synthetic inputs.

#include <random>

#include <benchmark/benchmark.h>

#include "nodecomm/cost.hpp"
#include "nodecomm/pattern.hpp"

namespace
{

using namespace nodecomm;

SparseMatrixPartition banded(std::uint64_t rows, std::size_t nprocs, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::vector<MatrixEntry> entries;
  for (std::uint64_t r = 0; r < rows; ++r)
  {
    for (int k = 0; k < 12; ++k)
    {
      // Mostly near-diagonal with a sprinkle of far columns.
      const std::uint64_t c = k < 9 ? (r + rows + rng() % 257 - 128) % rows : rng() % rows;
      entries.push_back({r, c, 1.0});
    }
  }
  return SparseMatrixPartition::block_rows(rows, rows, std::move(entries), nprocs);
}

CommPattern random_pattern(std::size_t nprocs, std::size_t per_rank, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::vector<Message> messages;
  for (Rank p = 0; p < nprocs; ++p)
  {
    for (std::size_t k = 0; k < per_rank; ++k)
    {
      const Rank q = static_cast<Rank>((p + 1 + rng() % (nprocs - 1)) % nprocs);
      messages.push_back({p, q, 1 + rng() % 200000});
    }
  }
  return CommPattern(nprocs, std::move(messages));
}

template <bool Parallel>
void BM_Spmv(benchmark::State &state)
{
  const auto a = banded(static_cast<std::uint64_t>(state.range(0)), 256, 1);
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(Parallel ? spmv_pattern(a) : serial::spmv_pattern(a));
  }
}

template <bool Parallel>
void BM_Spgemm(benchmark::State &state)
{
  const auto a = banded(static_cast<std::uint64_t>(state.range(0)), 256, 2);
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(Parallel ? spgemm_pattern(a, a) : serial::spgemm_pattern(a, a));
  }
}

template <bool Parallel>
void BM_Predict(benchmark::State &state)
{
  const std::size_t nprocs = static_cast<std::size_t>(state.range(0));
  const auto pattern = random_pattern(nprocs, 64, 3);
  const auto layout = RankLayout::block(nprocs, 16, 2);
  const auto topo = CubeTopology::for_layout(layout);
  const auto model = blue_waters_model();
  for (auto _ : state)
  {
    benchmark::DoNotOptimize(Parallel ? predict_pattern(pattern, layout, topo, model)
                                      : serial::predict_pattern(pattern, layout, topo, model));
  }
}

}  // namespace

BENCHMARK(BM_Spmv<false>)->Name("spmv/serial")->Arg(1 << 16)->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Spmv<true>)->Name("spmv/openmp")->Arg(1 << 16)->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Spgemm<false>)->Name("spgemm/serial")->Arg(1 << 16)->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Spgemm<true>)->Name("spgemm/openmp")->Arg(1 << 16)->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Predict<false>)->Name("predict/serial")->Arg(1024)->Arg(8192)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Predict<true>)->Name("predict/openmp")->Arg(1024)->Arg(8192)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
