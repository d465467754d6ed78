// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "nodecomm/cost.hpp"

#include <algorithm>
#include <vector>

#include "nodecomm/error.hpp"

namespace nodecomm
{

double postal_cost(Bytes size, const ParamSet &p)
{
  return p.alpha + static_cast<double>(size) / p.rb;
}

double max_rate_cost(Bytes size, std::size_t ppn, const ParamSet &p)
{
  const double procs = static_cast<double>(ppn);
  if (p.rn.is_unbounded() || procs * p.rb <= p.rn.value())
  {
    return postal_cost(size, p);
  }
  return p.alpha + procs * static_cast<double>(size) / p.rn.value();
}

double queue_search_cost(std::uint64_t n, double gamma)
{
  const auto count = static_cast<double>(n);
  return gamma * count * count;
}

double contention_cost(double link_bytes, double delta)
{
  return delta * link_bytes;
}

double link_bytes(double hops, double bytes_per_process, std::size_t ppn)
{
  return 2.0 * hops * hops * hops * bytes_per_process * static_cast<double>(ppn);
}

double message_cost(const MessageSpec &message, std::size_t ppn, const MachineModel &model)
{
  if (message.count == 0)
  {
    return 0.0;
  }
  const auto protocol = classify_protocol(message.size, model.thresholds());
  const auto &cell = model.cell(protocol, message.locality);
  return static_cast<double>(message.count) * max_rate_cost(message.size, ppn, cell);
}

std::size_t active_ppn(const CommPattern &pattern, const RankLayout &layout)
{
  std::vector<char> sends_off_node(pattern.nprocs(), 0);
  for (const auto &m : pattern.messages())
  {
    if (layout.placement(m.src).node != layout.placement(m.dst).node)
    {
      sends_off_node[m.src] = 1;
    }
  }
  std::vector<std::size_t> per_node(layout.num_nodes(), 0);
  std::size_t busiest = 1;
  for (Rank r = 0; r < pattern.nprocs(); ++r)
  {
    if (sends_off_node[r])
    {
      busiest = std::max(busiest, ++per_node[layout.placement(r).node]);
    }
  }
  return busiest;
}

double rank_transport_cost(const CommPattern &pattern, Rank rank, std::size_t ppn,
                           const RankLayout &layout, const MachineModel &model)
{
  double sum = 0.0;
  for (const auto &m : pattern.received_by(rank))
  {
    sum += message_cost(MessageSpec{m.size, 1, locality(m.src, m.dst, layout)}, ppn, model);
  }
  return sum;
}

double pattern_link_bytes(const CommPattern &pattern, const RankLayout &layout,
                          const CubeTopology &topo)
{
  Bytes off_node = 0;
  for (auto b : inter_node_bytes_sent(pattern, layout))
  {
    off_node += b;
  }
  if (off_node == 0)
  {
    return 0.0;
  }
  const double mean = static_cast<double>(off_node) / static_cast<double>(pattern.nprocs());
  return link_bytes(average_hops(topo), mean, layout.ppn());
}

namespace
{

void check_ranks(const CommPattern &pattern, const RankLayout &layout)
{
  if (pattern.nprocs() > layout.nprocs())
  {
    throw PatternError("pattern spans " + std::to_string(pattern.nprocs()) +
                       " ranks but the layout has only " + std::to_string(layout.nprocs()));
  }
}

double contention_part(const CommPattern &pattern, const RankLayout &layout,
                       const CubeTopology &topo, const MachineModel &model)
{
  const double bytes = pattern_link_bytes(pattern, layout, topo);
  return bytes == 0.0 ? 0.0 : contention_cost(bytes, model.delta());
}

double queue_part(std::size_t max_posted, const MachineModel &model)
{
  return model.queue_multiplier() * queue_search_cost(max_posted, model.gamma());
}

}  // namespace

CostBreakdown predict_pattern(const CommPattern &pattern, const RankLayout &layout,
                              const CubeTopology &topo, const MachineModel &model)
{
  check_ranks(pattern, layout);
  const std::size_t ppn = active_ppn(pattern, layout);
  const auto nprocs = static_cast<std::int64_t>(pattern.nprocs());
  double transport = 0.0;
  std::size_t max_posted = 0;
#pragma omp parallel for schedule(static) reduction(max : transport, max_posted)
  for (std::int64_t p = 0; p < nprocs; ++p)
  {
    const auto rank = static_cast<Rank>(p);
    transport = std::max(transport, rank_transport_cost(pattern, rank, ppn, layout, model));
    max_posted = std::max(max_posted, pattern.receive_count(rank));
  }
  return CostBreakdown::from_parts(transport, queue_part(max_posted, model),
                                   contention_part(pattern, layout, topo, model));
}

namespace serial
{

CostBreakdown predict_pattern(const CommPattern &pattern, const RankLayout &layout,
                              const CubeTopology &topo, const MachineModel &model)
{
  check_ranks(pattern, layout);
  const std::size_t ppn = active_ppn(pattern, layout);
  double transport = 0.0;
  std::size_t max_posted = 0;
  for (Rank p = 0; p < pattern.nprocs(); ++p)
  {
    transport = std::max(transport, rank_transport_cost(pattern, p, ppn, layout, model));
    max_posted = std::max(max_posted, pattern.receive_count(p));
  }
  return CostBreakdown::from_parts(transport, queue_part(max_posted, model),
                                   contention_part(pattern, layout, topo, model));
}

}  // namespace serial

}  // namespace nodecomm
