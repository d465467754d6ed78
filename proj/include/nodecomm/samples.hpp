// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nodecomm/params.hpp"

namespace nodecomm
{

/// Whether receives are posted in the order messages arrive or reversed.
enum class Ordering : std::uint8_t
{
  InOrder,
  Reversed
};

std::string_view to_string(Ordering ordering);  // "in" | "reversed"
std::optional<Ordering> parse_ordering(std::string_view text);

/// One high-volume ping-pong observation: n messages of `size` bytes, with
/// `ppn` processes per node communicating concurrently.
struct TimingSample
{
  Locality locality = Locality::IntraSocket;
  std::size_t ppn = 1;
  Bytes size = 0;
  std::uint64_t n = 1;
  Ordering ordering = Ordering::InOrder;
  double seconds = 0.0;

  bool operator==(const TimingSample &) const = default;
};

inline constexpr std::string_view kSamplesHeader = "locality,ppn,size,n,ordering,seconds";

/// CSV with header `locality,ppn,size,n,ordering,seconds`. Throws ParseError
/// (with line number) on malformed rows or seconds <= 0.
std::vector<TimingSample> load_samples(std::string_view text);
/// Seconds are written in shortest round-trip form, so loading is exact.
std::string save_samples(const std::vector<TimingSample> &samples);

}  // namespace nodecomm
