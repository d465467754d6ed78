// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "nodecomm/cost.hpp"
#include "nodecomm/error.hpp"
#include "nodecomm/pattern.hpp"

namespace nodecomm
{
namespace
{

const MachineModel kModel = blue_waters_model();

const ParamSet &rdv_inter() { return kModel.cell(Protocol::Rendezvous, Locality::InterNode); }

TEST(PostalCost, Examples)
{
  const auto &eager = kModel.cell(Protocol::Eager, Locality::IntraSocket);
  EXPECT_EQ(postal_cost(0, eager), eager.alpha);
  EXPECT_NEAR(postal_cost(1024, eager), 8.5e-7, 1e-21);
  const ParamSet free{0.0, 1e9};
  EXPECT_EQ(postal_cost(2000, free), 2.0 * postal_cost(1000, free));
}

TEST(MaxRateCost, InjectionLimitsSixteenSenders)
{
  const double expected = 3.0e-6 + 1.6e7 / 6.6e9;
  EXPECT_NEAR(max_rate_cost(1000000, 16, rdv_inter()), expected, 1e-12 * expected);
  EXPECT_NEAR(max_rate_cost(1000000, 2, ParamSet{0.0, 1e9, InjectionRate::bytes_per_second(1e9)}),
              2e-3, 1e-18);
}

TEST(MaxRateCost, SingleSenderIsPostalForEveryCell)
{
  for (const auto &cell : kModel.cells())
  {
    for (Bytes s : {0ull, 1ull, 128ull, 8192ull, 1000000ull})
    {
      EXPECT_EQ(max_rate_cost(s, 1, cell), postal_cost(s, cell));
    }
  }
}

TEST(MaxRateCost, ReducesToPostalBelowInjectionLimit)
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 5000; ++i)
  {
    const std::size_t ppn = 1 + static_cast<std::size_t>(unit(rng) * 64);
    const double rb = std::ldexp(1.0 + unit(rng), 20 + static_cast<int>(unit(rng) * 14));
    const ParamSet p{unit(rng) * 1e-5, rb,
                     InjectionRate::bytes_per_second(ppn * rb * (1.0 + unit(rng)))};
    const Bytes s = static_cast<Bytes>(unit(rng) * 1e7);
    EXPECT_EQ(max_rate_cost(s, ppn, p), postal_cost(s, p));
  }
}

TEST(QueueSearchCost, Examples)
{
  EXPECT_EQ(queue_search_cost(0, 8.4e-9), 0.0);
  EXPECT_NEAR(queue_search_cost(10000, 8.4e-9), 0.84, 1e-15);
  for (std::uint64_t n : {1u, 7u, 100u, 12345u})
  {
    EXPECT_DOUBLE_EQ(queue_search_cost(2 * n, 8.4e-9), 4.0 * queue_search_cost(n, 8.4e-9));
  }
}

TEST(ContentionCost, Examples)
{
  EXPECT_EQ(contention_cost(0.0, 1e-10), 0.0);
  EXPECT_NEAR(contention_cost(1769472.0, 1e-10), 1.769472e-4, 1e-18);
  EXPECT_EQ(contention_cost(2.0 * 1769472.0, 1e-10), 2.0 * contention_cost(1769472.0, 1e-10));
}

TEST(LinkBytes, Examples)
{
  EXPECT_EQ(link_bytes(0.0, 16384, 16), 0.0);
  EXPECT_EQ(link_bytes(1.5, 16384, 16), 1769472.0);
  EXPECT_EQ(link_bytes(1.0, 1, 1), 2.0);
}

TEST(MessageCost, CountScalesLinearly)
{
  const MessageSpec one{1000000, 1, Locality::InterNode};
  EXPECT_EQ(message_cost(one, 16, kModel), max_rate_cost(1000000, 16, rdv_inter()));
  EXPECT_EQ(message_cost({1000000, 0, Locality::InterNode}, 16, kModel), 0.0);
  EXPECT_DOUBLE_EQ(message_cost({1000000, 3, Locality::InterNode}, 16, kModel),
                   3.0 * message_cost(one, 16, kModel));
}

TEST(PredictPattern, EmptyPatternCostsNothing)
{
  const auto layout = RankLayout::block(4, 16, 2);
  const auto b = predict_pattern(CommPattern(4, {}), layout, CubeTopology(), kModel);
  EXPECT_EQ(b, CostBreakdown{});
}

TEST(PredictPattern, SingleEagerIntraSocketMessage)
{
  const auto layout = RankLayout::block(2, 16, 2);
  const auto b =
    predict_pattern(CommPattern(2, {{0, 1, 1024}}), layout, CubeTopology(), kModel);
  EXPECT_NEAR(b.transport, 8.5e-7, 1e-21);
  EXPECT_EQ(b.queue, kModel.gamma());
  EXPECT_EQ(b.contention, 0.0);
  EXPECT_EQ(b.total, b.transport + b.queue + b.contention);
}

TEST(PredictPattern, SymmetricReceiversChargeGammaNSquared)
{
  const std::uint64_t n = 50;
  std::vector<Message> messages;
  for (std::uint64_t i = 0; i < n; ++i)
  {
    messages.push_back({0, 1, 64});
    messages.push_back({1, 0, 64});
  }
  const auto layout = RankLayout::block(2, 16, 2);
  const auto b = predict_pattern(CommPattern(2, messages), layout, CubeTopology(), kModel);
  EXPECT_DOUBLE_EQ(b.queue, kModel.gamma() * n * n);
  EXPECT_DOUBLE_EQ(b.transport,
                   n * postal_cost(64, kModel.cell(Protocol::Short, Locality::IntraSocket)));
}

TEST(PredictPattern, ContentionUsesMeanInterNodeBytes)
{
  // Two nodes of two ranks, each rank sends 1000 B off-node; 2 Geminis -> side 2, h = 1.5.
  const auto layout = RankLayout::block(4, 2, 1);
  const CommPattern p(4, {{0, 2, 1000}, {1, 3, 1000}, {2, 0, 1000}, {3, 1, 1000}});
  const CubeTopology topo(2, 1);
  EXPECT_EQ(active_ppn(p, layout), 2u);
  EXPECT_DOUBLE_EQ(pattern_link_bytes(p, layout, topo), link_bytes(1.5, 1000.0, 2));
  const auto b = predict_pattern(p, layout, topo, kModel);
  EXPECT_DOUBLE_EQ(b.contention, kModel.delta() * link_bytes(1.5, 1000.0, 2));
  EXPECT_DOUBLE_EQ(b.transport, max_rate_cost(1000, 2, kModel.cell(Protocol::Eager,
                                                                   Locality::InterNode)));
}

TEST(PredictPattern, QueueMultiplierScalesQueueTerm)
{
  const MachineModel half(kModel.cells(), kModel.gamma(), kModel.delta(), {}, 0.5);
  const auto layout = RankLayout::block(2, 16, 2);
  const CommPattern p(2, {{0, 1, 8}, {0, 1, 8}, {0, 1, 8}});
  EXPECT_DOUBLE_EQ(predict_pattern(p, layout, CubeTopology(), half).queue,
                   0.5 * predict_pattern(p, layout, CubeTopology(), kModel).queue);
}

TEST(PredictPattern, RejectsLayoutSmallerThanPattern)
{
  EXPECT_THROW(predict_pattern(CommPattern(4, {{0, 3, 8}}), RankLayout::block(2, 2, 1),
                               CubeTopology(), kModel),
               PatternError);
}

TEST(PredictPattern, ParallelMatchesSerialOnRandomPatterns)
{
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 50; ++trial)
  {
    const std::size_t nprocs = 2 + rng() % 200;
    std::vector<Message> messages;
    const std::size_t count = rng() % 2000;
    for (std::size_t i = 0; i < count; ++i)
    {
      const Rank src = rng() % nprocs;
      Rank dst = rng() % nprocs;
      if (dst == src)
      {
        dst = (dst + 1) % nprocs;
      }
      messages.push_back({src, dst, 1 + rng() % 100000});
    }
    const CommPattern p(nprocs, messages);
    const auto layout = RankLayout::block(nprocs, 16, 2);
    const auto topo = CubeTopology::for_layout(layout);
    const auto parallel = predict_pattern(p, layout, topo, kModel);
    EXPECT_EQ(parallel, serial::predict_pattern(p, layout, topo, kModel));
    EXPECT_GE(parallel.transport, 0.0);
    EXPECT_GE(parallel.queue, 0.0);
    EXPECT_GE(parallel.contention, 0.0);
    EXPECT_EQ(parallel.total, parallel.transport + parallel.queue + parallel.contention);
  }
}

}  // namespace
}  // namespace nodecomm
