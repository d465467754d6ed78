// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "nodecomm/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "nodecomm/error.hpp"

namespace nodecomm
{

std::vector<Tag> PingPongSchedule::send_tags() const
{
  std::vector<Tag> tags(n);
  std::iota(tags.begin(), tags.end(), Tag{0});
  return tags;
}

std::vector<Tag> PingPongSchedule::recv_tags() const
{
  auto tags = send_tags();
  if (ordering == Ordering::Reversed)
  {
    std::reverse(tags.begin(), tags.end());
  }
  return tags;
}

QueueTrace PingPongSchedule::receive_trace() const
{
  return QueueTrace{recv_tags(), send_tags()};
}

PingPongSchedule make_schedule(RankPair pair, std::uint64_t n, Bytes size, Ordering ordering)
{
  return make_schedule(std::vector<RankPair>{pair}, n, size, ordering);
}

PingPongSchedule make_schedule(std::vector<RankPair> pairs, std::uint64_t n, Bytes size,
                               Ordering ordering)
{
  if (n == 0 || size == 0)
  {
    throw PatternError("a ping-pong schedule needs n >= 1 messages of size >= 1");
  }
  if (pairs.empty())
  {
    throw PatternError("a ping-pong schedule needs at least one rank pair");
  }
  std::set<Rank> used;
  for (auto &p : pairs)
  {
    if (p.low == p.high)
    {
      throw PatternError("rank " + std::to_string(p.low) + " paired with itself");
    }
    if (p.low > p.high)
    {
      std::swap(p.low, p.high);
    }
    if (!used.insert(p.low).second || !used.insert(p.high).second)
    {
      throw PatternError("rank pairs of one schedule must be disjoint");
    }
  }
  return PingPongSchedule{std::move(pairs), n, size, ordering};
}

CommPattern schedule_pattern(const PingPongSchedule &schedule, std::size_t nprocs)
{
  std::vector<Message> messages;
  messages.reserve(2 * schedule.pairs.size() * schedule.n);
  for (const auto &p : schedule.pairs)
  {
    for (std::uint64_t i = 0; i < schedule.n; ++i)
    {
      messages.push_back(Message{p.low, p.high, schedule.size});
      messages.push_back(Message{p.high, p.low, schedule.size});
    }
  }
  return CommPattern(nprocs, std::move(messages));
}

std::uint64_t ordering_steps(std::uint64_t n, Ordering ordering)
{
  return ordering == Ordering::InOrder ? n : worst_case_steps(n);
}

std::vector<CostBreakdown> schedule_costs(const PingPongSchedule &schedule,
                                          const MachineModel &model, const RankLayout &layout,
                                          const CubeTopology &topo)
{
  const auto pattern = schedule_pattern(schedule, layout.nprocs());
  const std::size_t ppn = active_ppn(pattern, layout);
  const auto steps = simulate_queue(schedule.receive_trace()).total_steps;
  const double queue = model.gamma() * static_cast<double>(steps);
  const double shared = pattern_link_bytes(pattern, layout, topo);
  const double contention = shared == 0.0 ? 0.0 : contention_cost(shared, model.delta());

  std::vector<CostBreakdown> costs;
  costs.reserve(schedule.pairs.size());
  for (const auto &p : schedule.pairs)
  {
    const double transport =
      std::max(rank_transport_cost(pattern, p.low, ppn, layout, model),
               rank_transport_cost(pattern, p.high, ppn, layout, model));
    const bool off_node = locality(p.low, p.high, layout) == Locality::InterNode;
    costs.push_back(CostBreakdown::from_parts(transport, queue, off_node ? contention : 0.0));
  }
  return costs;
}

std::vector<TimingSample> synth_timings(const PingPongSchedule &schedule,
                                        const MachineModel &model, const RankLayout &layout,
                                        const CubeTopology &topo, double noise,
                                        std::uint64_t seed)
{
  if (!std::isfinite(noise) || noise < 0.0)
  {
    throw Error("noise must be a finite relative standard deviation >= 0");
  }
  const auto costs = schedule_costs(schedule, model, layout, topo);
  const auto pattern = schedule_pattern(schedule, layout.nprocs());
  const std::size_t ppn = active_ppn(pattern, layout);

  // Mean-one lognormal: sigma^2 = ln(1 + noise^2), mu = -sigma^2 / 2.
  const double sigma = std::sqrt(std::log1p(noise * noise));
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> factor(-0.5 * sigma * sigma, sigma);

  std::vector<TimingSample> samples;
  samples.reserve(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i)
  {
    const auto &p = schedule.pairs[i];
    TimingSample s;
    s.locality = locality(p.low, p.high, layout);
    s.ppn = ppn;
    s.size = schedule.size;
    s.n = schedule.n;
    s.ordering = schedule.ordering;
    s.seconds = noise == 0.0 ? costs[i].total : costs[i].total * factor(rng);
    samples.push_back(s);
  }
  return samples;
}

std::vector<std::string_view> scenario_names()
{
  return {"pair-intra-socket", "pair-intra-node", "pair-inter-node", "node-pairs",
          "gemini-line"};
}

PingPongScenario make_scenario(std::string_view name, const ScenarioShape &shape)
{
  const std::size_t ppn = shape.ppn;
  const std::size_t sockets = shape.sockets;
  if (ppn == 0 || sockets == 0 || ppn % sockets != 0)
  {
    throw TopologyError("ppn must be a positive multiple of the socket count");
  }
  const std::size_t per_socket = ppn / sockets;
  auto block = [&](std::size_t nodes) { return RankLayout::block(nodes * ppn, ppn, sockets); };
  auto cube_for = [&](const RankLayout &layout) {
    return CubeTopology::for_layout(layout, shape.nodes_per_gemini);
  };

  if (name == "pair-intra-socket")
  {
    if (per_socket < 2)
    {
      throw TopologyError("pair-intra-socket needs two ranks per socket");
    }
    auto layout = block(1);
    auto topo = cube_for(layout);
    return PingPongScenario{std::move(layout), topo, {RankPair{0, 1}}};
  }
  if (name == "pair-intra-node")
  {
    if (sockets < 2)
    {
      throw TopologyError("pair-intra-node needs two sockets per node");
    }
    auto layout = block(1);
    auto topo = cube_for(layout);
    return PingPongScenario{std::move(layout), topo,
                            {RankPair{0, static_cast<Rank>(per_socket)}}};
  }
  if (name == "pair-inter-node" || name == "node-pairs")
  {
    auto layout = block(2);
    auto topo = cube_for(layout);
    std::vector<RankPair> pairs;
    const std::size_t count = name == "node-pairs" ? ppn : 1;
    for (std::size_t i = 0; i < count; ++i)
    {
      pairs.push_back(RankPair{static_cast<Rank>(i), static_cast<Rank>(ppn + i)});
    }
    return PingPongScenario{std::move(layout), topo, std::move(pairs)};
  }
  if (name == "gemini-line")
  {
    const std::size_t geminis = shape.geminis;
    if (geminis < 2 || geminis % 2 != 0)
    {
      throw TopologyError("gemini-line needs an even number of Geminis");
    }
    const std::size_t per_gemini = shape.nodes_per_gemini * ppn;
    auto layout = block(geminis * shape.nodes_per_gemini);
    const auto topo = CubeTopology::for_geminis(geminis, shape.nodes_per_gemini);
    std::vector<RankPair> pairs;
    for (std::size_t g = 0; g < geminis / 2; ++g)
    {
      for (std::size_t i = 0; i < per_gemini; ++i)
      {
        pairs.push_back(RankPair{static_cast<Rank>(g * per_gemini + i),
                                 static_cast<Rank>((g + geminis / 2) * per_gemini + i)});
      }
    }
    return PingPongScenario{std::move(layout), topo, std::move(pairs)};
  }
  throw Error("unknown scenario `" + std::string(name) + "`");
}

}  // namespace nodecomm
