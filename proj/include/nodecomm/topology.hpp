// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "nodecomm/params.hpp"

namespace nodecomm
{

using Rank = std::uint32_t;

struct Placement
{
  std::uint32_t node = 0;
  std::uint32_t socket = 0;

  bool operator==(const Placement &) const = default;
};

/// Rank -> (node, socket) map. Immutable after construction.
class RankLayout
{
public:
  /// Rank r lives on node r / ppn, socket (r % ppn) / (ppn / sockets_per_node).
  static RankLayout block(std::size_t nprocs, std::size_t ppn, std::size_t sockets_per_node);

  /// Explicit mapping; rank i is placements[i]. ppn and sockets_per_node are
  /// derived (largest node population, largest socket index + 1).
  static RankLayout from_placements(std::vector<Placement> placements);

  std::size_t nprocs() const noexcept { return placements_.size(); }
  std::size_t ppn() const noexcept { return ppn_; }
  std::size_t sockets_per_node() const noexcept { return sockets_; }
  std::size_t num_nodes() const noexcept { return nodes_; }

  /// Throws TopologyError for ranks outside [0, nprocs).
  const Placement &placement(Rank rank) const;

private:
  RankLayout(std::vector<Placement> placements, std::size_t ppn, std::size_t sockets);

  std::vector<Placement> placements_;
  std::size_t ppn_ = 1;
  std::size_t sockets_ = 1;
  std::size_t nodes_ = 0;
};

/// Layout file: one `rank node socket` triple per line; `#` starts a comment.
/// Ranks must cover 0..N-1 exactly once.
RankLayout load_layout(std::string_view text);

Locality locality(Rank src, Rank dst, const RankLayout &layout);

struct GeminiCoord
{
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;

  bool operator==(const GeminiCoord &) const = default;
};

/// Smallest c with c^3 >= num_geminis.
std::size_t cube_side(std::size_t num_geminis);

/// A perfect side x side x side block of Geminis carved out of the torus.
/// No wraparound links inside the block.
class CubeTopology
{
public:
  explicit CubeTopology(std::size_t side = 1, std::size_t nodes_per_gemini = 2);

  /// Smallest cube holding `num_geminis` routers.
  static CubeTopology for_geminis(std::size_t num_geminis, std::size_t nodes_per_gemini = 2);
  /// Smallest cube holding the nodes of `layout`.
  static CubeTopology for_layout(const RankLayout &layout, std::size_t nodes_per_gemini = 2);

  std::size_t side() const noexcept { return side_; }
  std::size_t nodes_per_gemini() const noexcept { return nodes_per_gemini_; }
  std::size_t num_geminis() const noexcept { return side_ * side_ * side_; }

  /// Row-major labelling: x fastest, then y, then z.
  GeminiCoord coord(std::size_t gemini) const;
  std::size_t gemini_of_node(std::size_t node) const { return node / nodes_per_gemini_; }

private:
  std::size_t side_;
  std::size_t nodes_per_gemini_;
};

/// Manhattan distance between two Geminis of the cube.
std::int64_t hops(const GeminiCoord &a, const GeminiCoord &b);

/// Mean hop count over all ordered Gemini pairs, self-pairs included:
/// (c^2 - 1) / c for a cube of side c.
double average_hops(const CubeTopology &topo);

}  // namespace nodecomm
