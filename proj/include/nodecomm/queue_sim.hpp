// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace nodecomm
{

using Tag = std::uint32_t;

/// Receives are posted in `post_order`; envelopes arrive in `arrival_order`.
/// Both hold the same set of tags.
struct QueueTrace
{
  std::vector<Tag> post_order;
  std::vector<Tag> arrival_order;

  std::size_t size() const noexcept { return post_order.size(); }
};

enum class QueueEvent : std::uint8_t
{
  Post,
  Arrival
};

/// How posts and arrivals interleave in time.
using QueueSchedule = std::vector<QueueEvent>;

/// Every receive is posted before the first envelope arrives.
QueueSchedule posts_first_schedule(std::size_t n);
/// Post, arrival, post, arrival, ...
QueueSchedule alternating_schedule(std::size_t n);

struct QueueStats
{
  std::uint64_t total_steps = 0;  // queue entries examined, matches included
  std::size_t max_unexpected_depth = 0;
  std::size_t max_posted_depth = 0;

  bool operator==(const QueueStats &) const = default;
};

/// Replays the posted/unexpected two-queue discipline. An arrival scans the
/// posted queue front to back for its tag, otherwise joins the unexpected
/// queue; a post scans the unexpected queue, otherwise joins the posted queue.
/// Throws TraceError if the orders are not permutations of one tag set or the
/// schedule does not hold exactly n posts and n arrivals.
QueueStats simulate_queue(const QueueTrace &trace, const QueueSchedule &schedule);
QueueStats simulate_queue(const QueueTrace &trace);  // posts first

/// n (n + 1) / 2: entries examined when arrivals reverse the posting order.
std::uint64_t worst_case_steps(std::uint64_t n);

QueueTrace in_order_trace(std::size_t n);
QueueTrace reversed_trace(std::size_t n);
/// Posts in tag order; arrivals are a seeded uniform shuffle.
QueueTrace random_trace(std::size_t n, std::uint64_t seed);

}  // namespace nodecomm
