// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "nodecomm/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <sstream>
#include <string>

#include "nodecomm/error.hpp"

namespace nodecomm
{

RankLayout::RankLayout(std::vector<Placement> placements, std::size_t ppn, std::size_t sockets)
  : placements_(std::move(placements)), ppn_(ppn), sockets_(sockets)
{
  for (const auto &p : placements_)
  {
    nodes_ = std::max<std::size_t>(nodes_, p.node + 1);
  }
}

RankLayout RankLayout::block(std::size_t nprocs, std::size_t ppn, std::size_t sockets_per_node)
{
  if (ppn == 0 || sockets_per_node == 0)
  {
    throw TopologyError("ppn and sockets per node must be positive");
  }
  if (ppn % sockets_per_node != 0)
  {
    throw TopologyError("ppn (" + std::to_string(ppn) + ") is not divisible by sockets per node (" +
                        std::to_string(sockets_per_node) + ")");
  }
  const std::size_t per_socket = ppn / sockets_per_node;
  std::vector<Placement> placements(nprocs);
  for (std::size_t r = 0; r < nprocs; ++r)
  {
    placements[r] = Placement{static_cast<std::uint32_t>(r / ppn),
                              static_cast<std::uint32_t>((r % ppn) / per_socket)};
  }
  return RankLayout(std::move(placements), ppn, sockets_per_node);
}

RankLayout RankLayout::from_placements(std::vector<Placement> placements)
{
  std::vector<std::size_t> population;
  std::size_t sockets = 1;
  for (const auto &p : placements)
  {
    if (p.node >= population.size())
    {
      population.resize(p.node + 1, 0);
    }
    ++population[p.node];
    sockets = std::max<std::size_t>(sockets, p.socket + 1);
  }
  std::size_t ppn = 1;
  for (auto count : population)
  {
    ppn = std::max(ppn, count);
  }
  return RankLayout(std::move(placements), ppn, sockets);
}

const Placement &RankLayout::placement(Rank rank) const
{
  if (rank >= placements_.size())
  {
    throw TopologyError("rank " + std::to_string(rank) + " outside layout of " +
                        std::to_string(placements_.size()) + " processes");
  }
  return placements_[rank];
}

RankLayout load_layout(std::string_view text)
{
  std::vector<Placement> placements;
  std::vector<bool> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
    {
      line.erase(hash);
    }
    std::istringstream fields(line);
    long long rank = 0;
    long long node = 0;
    long long socket = 0;
    if (!(fields >> rank))
    {
      if (line.find_first_not_of(" \t\r") == std::string::npos)
      {
        continue;
      }
      throw ParseError(line_no, "expected `rank node socket`");
    }
    std::string extra;
    if (!(fields >> node >> socket) || (fields >> extra))
    {
      throw ParseError(line_no, "expected `rank node socket`");
    }
    if (rank < 0 || node < 0 || socket < 0 || rank > 0xffffffffLL || node > 0xffffffffLL ||
        socket > 0xffffffffLL)
    {
      throw ParseError(line_no, "rank, node and socket must be non-negative 32-bit integers");
    }
    const auto r = static_cast<std::size_t>(rank);
    if (r >= placements.size())
    {
      placements.resize(r + 1);
      seen.resize(r + 1, false);
    }
    if (seen[r])
    {
      throw ParseError(line_no, "rank " + std::to_string(rank) + " assigned twice");
    }
    seen[r] = true;
    placements[r] = Placement{static_cast<std::uint32_t>(node), static_cast<std::uint32_t>(socket)};
  }
  if (placements.empty())
  {
    throw ParseError(0, "layout file lists no ranks");
  }
  for (std::size_t r = 0; r < seen.size(); ++r)
  {
    if (!seen[r])
    {
      throw ParseError(0, "layout is not dense: rank " + std::to_string(r) + " missing");
    }
  }
  return RankLayout::from_placements(std::move(placements));
}

Locality locality(Rank src, Rank dst, const RankLayout &layout)
{
  const auto &a = layout.placement(src);
  const auto &b = layout.placement(dst);
  if (a.node != b.node)
  {
    return Locality::InterNode;
  }
  return a.socket == b.socket ? Locality::IntraSocket : Locality::IntraNode;
}

std::size_t cube_side(std::size_t num_geminis)
{
  std::size_t c = 1;
  while (c * c * c < num_geminis)
  {
    ++c;
  }
  return c;
}

CubeTopology::CubeTopology(std::size_t side, std::size_t nodes_per_gemini)
  : side_(side), nodes_per_gemini_(nodes_per_gemini)
{
  if (side_ == 0 || nodes_per_gemini_ == 0)
  {
    throw TopologyError("cube side and nodes per Gemini must be at least 1");
  }
}

CubeTopology CubeTopology::for_geminis(std::size_t num_geminis, std::size_t nodes_per_gemini)
{
  return CubeTopology(cube_side(std::max<std::size_t>(num_geminis, 1)), nodes_per_gemini);
}

CubeTopology CubeTopology::for_layout(const RankLayout &layout, std::size_t nodes_per_gemini)
{
  if (nodes_per_gemini == 0)
  {
    throw TopologyError("nodes per Gemini must be at least 1");
  }
  const std::size_t geminis = (layout.num_nodes() + nodes_per_gemini - 1) / nodes_per_gemini;
  return for_geminis(geminis, nodes_per_gemini);
}

GeminiCoord CubeTopology::coord(std::size_t gemini) const
{
  if (gemini >= num_geminis())
  {
    throw TopologyError("Gemini " + std::to_string(gemini) + " outside cube of side " +
                        std::to_string(side_));
  }
  const auto c = static_cast<std::int64_t>(side_);
  const auto g = static_cast<std::int64_t>(gemini);
  return GeminiCoord{g % c, (g / c) % c, g / (c * c)};
}

std::int64_t hops(const GeminiCoord &a, const GeminiCoord &b)
{
  return std::abs(a.x - b.x) + std::abs(a.y - b.y) + std::abs(a.z - b.z);
}

double average_hops(const CubeTopology &topo)
{
  // Per axis, the mean |i - j| over uniform i, j in [0, c) is (c^2 - 1) / (3c).
  const auto c = static_cast<double>(topo.side());
  return (c * c - 1.0) / c;
}

}  // namespace nodecomm
