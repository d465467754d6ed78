// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "nodecomm/cost.hpp"
#include "nodecomm/pattern.hpp"
#include "nodecomm/queue_sim.hpp"
#include "nodecomm/samples.hpp"

namespace nodecomm
{

/// Two ranks exchanging messages; `low` sends first, then receives.
struct RankPair
{
  Rank low = 0;
  Rank high = 1;

  bool operator==(const RankPair &) const = default;
};

/// High-volume ping-pong: every pair runs concurrently, each side sending n
/// messages of `size` bytes tagged 0..n-1 and posting its n receives either in
/// tag order or in reverse.
struct PingPongSchedule
{
  std::vector<RankPair> pairs;
  std::uint64_t n = 1;
  Bytes size = 1;
  Ordering ordering = Ordering::InOrder;

  std::vector<Tag> send_tags() const;
  std::vector<Tag> recv_tags() const;
  /// Posts follow recv_tags, arrivals follow send_tags.
  QueueTrace receive_trace() const;
};

/// Orders the pair so the lower rank sends first. Throws PatternError when
/// the ranks coincide or n or size is zero.
PingPongSchedule make_schedule(RankPair pair, std::uint64_t n, Bytes size, Ordering ordering);
/// Several disjoint pairs running concurrently.
PingPongSchedule make_schedule(std::vector<RankPair> pairs, std::uint64_t n, Bytes size,
                               Ordering ordering);

/// Every message the schedule sends, over a world of nprocs ranks.
CommPattern schedule_pattern(const PingPongSchedule &schedule, std::size_t nprocs);

/// Queue entries one receiver examines with all receives posted first.
std::uint64_t ordering_steps(std::uint64_t n, Ordering ordering);

/// Noise-free cost of each pair's receive phase: transport summed over the n
/// receives, gamma * simulated queue steps, and the pattern's contention when
/// the pair spans nodes. Transport matches predict_pattern on
/// schedule_pattern() bit for bit.
std::vector<CostBreakdown> schedule_costs(const PingPongSchedule &schedule,
                                          const MachineModel &model, const RankLayout &layout,
                                          const CubeTopology &topo);

/// One sample per pair: schedule_costs() totals times a lognormal factor with
/// mean 1 and relative standard deviation `noise`. Deterministic per seed.
std::vector<TimingSample> synth_timings(const PingPongSchedule &schedule,
                                        const MachineModel &model, const RankLayout &layout,
                                        const CubeTopology &topo, double noise,
                                        std::uint64_t seed);

/// Machine shape a canned scenario is laid out on.
struct ScenarioShape
{
  std::size_t ppn = 16;
  std::size_t sockets = 2;
  std::size_t geminis = 4;  // gemini-line only
  std::size_t nodes_per_gemini = 2;
};

/// Ranks, block layout and cube for one canned experiment:
///   pair-intra-socket  ranks 0 and 1 of one node
///   pair-intra-node    rank 0 and the first rank of the second socket
///   pair-inter-node    rank 0 of two neighbouring nodes
///   node-pairs         every rank of node 0 with its counterpart on node 1
///   gemini-line        a line of Geminis; each rank of Gemini g (g < G/2)
///                      with its counterpart on Gemini g + G/2
struct PingPongScenario
{
  RankLayout layout;
  CubeTopology topo;
  std::vector<RankPair> pairs;
};

PingPongScenario make_scenario(std::string_view name, const ScenarioShape &shape = {});
std::vector<std::string_view> scenario_names();

}  // namespace nodecomm
