// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "nodecomm/cost.hpp"
#include "nodecomm/error.hpp"
#include "nodecomm/samples.hpp"
#include "nodecomm/schedule.hpp"

namespace nodecomm
{
namespace
{

const MachineModel kModel = blue_waters_model();

TEST(MakeSchedule, NormalizesAndValidates)
{
  const auto s = make_schedule(RankPair{3, 1}, 4, 64, Ordering::Reversed);
  EXPECT_EQ(s.pairs.front(), (RankPair{1, 3}));
  EXPECT_EQ(s.send_tags(), (std::vector<Tag>{0, 1, 2, 3}));
  EXPECT_EQ(s.recv_tags(), (std::vector<Tag>{3, 2, 1, 0}));
  EXPECT_THROW(make_schedule(RankPair{1, 1}, 4, 64, Ordering::InOrder), PatternError);
  EXPECT_THROW(make_schedule({RankPair{0, 1}, RankPair{1, 2}}, 4, 64, Ordering::InOrder),
               PatternError);
  EXPECT_THROW(make_schedule(RankPair{0, 1}, 0, 64, Ordering::InOrder), PatternError);
}

TEST(SynthTimings, SingleInOrderMessage)
{
  const auto sc = make_scenario("pair-intra-socket");
  const auto s = synth_timings(make_schedule(sc.pairs, 1, 1024, Ordering::InOrder), kModel,
                               sc.layout, sc.topo, 0.0, 9);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].seconds,
            message_cost({1024, 1, Locality::IntraSocket}, 1, kModel) + kModel.gamma() * 1.0);
  EXPECT_EQ(s[0].locality, Locality::IntraSocket);
}

TEST(SynthTimings, ReversedHundredMessages)
{
  const auto sc = make_scenario("pair-intra-socket");
  const auto s = synth_timings(make_schedule(sc.pairs, 100, 1024, Ordering::Reversed), kModel,
                               sc.layout, sc.topo, 0.0, 9);
  const double transport = message_cost({1024, 100, Locality::IntraSocket}, 1, kModel);
  const double expected = transport + kModel.gamma() * 5050.0;
  EXPECT_NEAR(s[0].seconds, expected, 1e-12 * expected);
}

TEST(SynthTimings, DeterministicPerSeed)
{
  const auto sc = make_scenario("node-pairs");
  const auto schedule = make_schedule(sc.pairs, 10, 100000, Ordering::InOrder);
  const auto a = synth_timings(schedule, kModel, sc.layout, sc.topo, 0.05, 42);
  EXPECT_EQ(a, synth_timings(schedule, kModel, sc.layout, sc.topo, 0.05, 42));
  EXPECT_NE(a, synth_timings(schedule, kModel, sc.layout, sc.topo, 0.05, 43));
  EXPECT_THROW(synth_timings(schedule, kModel, sc.layout, sc.topo, -1.0, 1), Error);
}

TEST(SynthTimings, AgreesWithPredictPattern)
{
  for (auto name : scenario_names())
  {
    const auto sc = make_scenario(name);
    for (std::uint64_t n : {1u, 7u, 60u})
    {
      for (Bytes size : {8u, 4096u, 65536u})
      {
        for (auto order : {Ordering::InOrder, Ordering::Reversed})
        {
          const auto schedule = make_schedule(sc.pairs, n, size, order);
          const auto sample =
            synth_timings(schedule, kModel, sc.layout, sc.topo, 0.0, 0).front();
          const auto costs = schedule_costs(schedule, kModel, sc.layout, sc.topo).front();
          const auto predicted = predict_pattern(schedule_pattern(schedule, sc.layout.nprocs()),
                                                 sc.layout, sc.topo, kModel);
          EXPECT_EQ(sample.seconds, costs.total);
          EXPECT_EQ(costs.transport, predicted.transport) << name;
          EXPECT_EQ(costs.contention, predicted.contention) << name;
          // The pattern-level queue term is the worst-case bound over any arrival order.
          EXPECT_LE(costs.queue, predicted.queue) << name;
          if (n == 1)
          {
            EXPECT_EQ(costs.queue, predicted.queue) << name;
          }
        }
      }
    }
  }
}

TEST(Samples, CsvRoundTrip)
{
  const std::vector<TimingSample> samples = {
    {Locality::InterNode, 16, 65536, 10, Ordering::Reversed, 1.25e-4},
    {Locality::IntraSocket, 1, 0, 1, Ordering::InOrder, 4.4e-7},
  };
  const auto text = save_samples(samples);
  EXPECT_EQ(text.substr(0, kSamplesHeader.size()), kSamplesHeader);
  EXPECT_EQ(load_samples(text), samples);
}

TEST(Samples, RejectsBadRows)
{
  const std::string header = std::string(kSamplesHeader) + "\n";
  for (const auto &row : {"inter_node,1,8,1,in,0\n", "inter_node,0,8,1,in,1e-6\n",
                          "inter_node,1,8,0,in,1e-6\n", "nowhere,1,8,1,in,1e-6\n",
                          "inter_node,1,8,1,sideways,1e-6\n", "inter_node,1,8,1,in\n",
                          "inter_node,1,-8,1,in,1e-6\n"})
  {
    try
    {
      load_samples(header + row);
      ADD_FAILURE() << row;
    }
    catch (const ParseError &e)
    {
      EXPECT_EQ(e.line(), 2u) << row;
    }
  }
  EXPECT_THROW(load_samples("size,seconds\n"), ParseError);
}

}  // namespace
}  // namespace nodecomm
