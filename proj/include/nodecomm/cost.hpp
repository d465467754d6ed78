// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

#include "nodecomm/params.hpp"
#include "nodecomm/pattern.hpp"
#include "nodecomm/topology.hpp"

namespace nodecomm
{

struct MessageSpec
{
  Bytes size = 0;
  std::uint64_t count = 1;
  Locality locality = Locality::IntraSocket;
};

/// Predicted time of one communication phase, split by source.
struct CostBreakdown
{
  double transport = 0.0;   // max-rate
  double queue = 0.0;       // receive-queue search
  double contention = 0.0;  // shared network links
  double total = 0.0;

  static CostBreakdown from_parts(double transport, double queue, double contention)
  {
    return CostBreakdown{transport, queue, contention, transport + queue + contention};
  }

  bool operator==(const CostBreakdown &) const = default;
};

/// alpha + size / rb
double postal_cost(Bytes size, const ParamSet &p);

/// alpha + ppn * size / min(rn, ppn * rb). Whenever ppn * rb <= rn (always, for
/// an unbounded rn) this returns postal_cost(size, p) bit for bit.
double max_rate_cost(Bytes size, std::size_t ppn, const ParamSet &p);

/// gamma * n^2
double queue_search_cost(std::uint64_t n, double gamma);

/// delta * link_bytes
double contention_cost(double link_bytes, double delta);

/// Bytes expected to contend for one link: 2 h^3 b ppn.
double link_bytes(double hops, double bytes_per_process, std::size_t ppn);

/// count * max_rate_cost of the (protocol, locality) cell the message falls in.
double message_cost(const MessageSpec &message, std::size_t ppn, const MachineModel &model);

/// Largest number of ranks on one node that send at least one off-node
/// message; 1 when nothing leaves a node.
std::size_t active_ppn(const CommPattern &pattern, const RankLayout &layout);

/// link_bytes(average_hops, mean off-node bytes sent per rank, layout ppn);
/// the mean runs over every rank of the pattern, silent ones included.
double pattern_link_bytes(const CommPattern &pattern, const RankLayout &layout,
                          const CubeTopology &topo);

/// Summed message_cost of everything `rank` receives, in pattern order.
double rank_transport_cost(const CommPattern &pattern, Rank rank, std::size_t ppn,
                           const RankLayout &layout, const MachineModel &model);

/// Cost of a communication phase, gated by its slowest process:
///   transport  = max over ranks of the summed cost of the messages it receives
///   queue      = queue_multiplier * gamma * (max receives posted by one rank)^2
///   contention = delta * link_bytes(average_hops, mean off-node bytes per rank,
///                                   layout ppn)
/// Runs the per-rank loop with OpenMP; the result does not depend on the schedule.
CostBreakdown predict_pattern(const CommPattern &pattern, const RankLayout &layout,
                              const CubeTopology &topo, const MachineModel &model);

namespace serial
{
CostBreakdown predict_pattern(const CommPattern &pattern, const RankLayout &layout,
                              const CubeTopology &topo, const MachineModel &model);
}  // namespace serial

}  // namespace nodecomm
