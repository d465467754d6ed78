// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "nodecomm/queue_sim.hpp"

#include <algorithm>
#include <vector>
#include <numeric>
#include <random>
#include <string>

#include "nodecomm/error.hpp"

namespace nodecomm
{

namespace
{

void validate(const QueueTrace &trace, const QueueSchedule &schedule)
{
  if (trace.post_order.size() != trace.arrival_order.size())
  {
    throw TraceError("post and arrival orders have different lengths");
  }
  auto posts = trace.post_order;
  auto arrivals = trace.arrival_order;
  std::sort(posts.begin(), posts.end());
  std::sort(arrivals.begin(), arrivals.end());
  if (std::adjacent_find(posts.begin(), posts.end()) != posts.end())
  {
    throw TraceError("duplicate tag in post order");
  }
  if (posts != arrivals)
  {
    throw TraceError("post and arrival orders do not hold the same tags");
  }
  const auto n_posts = std::count(schedule.begin(), schedule.end(), QueueEvent::Post);
  const auto n_arrivals = static_cast<std::ptrdiff_t>(schedule.size()) - n_posts;
  if (static_cast<std::size_t>(n_posts) != trace.size() ||
      static_cast<std::size_t>(n_arrivals) != trace.size())
  {
    throw TraceError("schedule must interleave exactly " + std::to_string(trace.size()) +
                     " posts and " + std::to_string(trace.size()) + " arrivals");
  }
}

// Scans front to back; removes and reports the match. Every entry looked at,
// including the match itself, counts as one step.
bool match_and_remove(std::vector<Tag> &queue, Tag tag, std::uint64_t &steps)
{
  for (auto it = queue.begin(); it != queue.end(); ++it)
  {
    ++steps;
    if (*it == tag)
    {
      queue.erase(it);
      return true;
    }
  }
  return false;
}

}  // namespace

QueueSchedule posts_first_schedule(std::size_t n)
{
  QueueSchedule schedule(n, QueueEvent::Post);
  schedule.resize(2 * n, QueueEvent::Arrival);
  return schedule;
}

QueueSchedule alternating_schedule(std::size_t n)
{
  QueueSchedule schedule;
  schedule.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i)
  {
    schedule.push_back(QueueEvent::Post);
    schedule.push_back(QueueEvent::Arrival);
  }
  return schedule;
}

QueueStats simulate_queue(const QueueTrace &trace, const QueueSchedule &schedule)
{
  validate(trace, schedule);
  QueueStats stats;
  std::vector<Tag> posted;
  std::vector<Tag> unexpected;
  std::size_t next_post = 0;
  std::size_t next_arrival = 0;
  for (auto event : schedule)
  {
    if (event == QueueEvent::Post)
    {
      const Tag tag = trace.post_order[next_post++];
      if (!match_and_remove(unexpected, tag, stats.total_steps))
      {
        posted.push_back(tag);
        stats.max_posted_depth = std::max(stats.max_posted_depth, posted.size());
      }
    }
    else
    {
      const Tag tag = trace.arrival_order[next_arrival++];
      if (!match_and_remove(posted, tag, stats.total_steps))
      {
        unexpected.push_back(tag);
        stats.max_unexpected_depth = std::max(stats.max_unexpected_depth, unexpected.size());
      }
    }
  }
  return stats;
}

QueueStats simulate_queue(const QueueTrace &trace)
{
  return simulate_queue(trace, posts_first_schedule(trace.size()));
}

std::uint64_t worst_case_steps(std::uint64_t n)
{
  return n * (n + 1) / 2;
}

QueueTrace in_order_trace(std::size_t n)
{
  QueueTrace trace;
  trace.post_order.resize(n);
  std::iota(trace.post_order.begin(), trace.post_order.end(), Tag{0});
  trace.arrival_order = trace.post_order;
  return trace;
}

QueueTrace reversed_trace(std::size_t n)
{
  QueueTrace trace = in_order_trace(n);
  std::reverse(trace.arrival_order.begin(), trace.arrival_order.end());
  return trace;
}

QueueTrace random_trace(std::size_t n, std::uint64_t seed)
{
  QueueTrace trace = in_order_trace(n);
  std::mt19937_64 rng(seed);
  std::shuffle(trace.arrival_order.begin(), trace.arrival_order.end(), rng);
  return trace;
}

}  // namespace nodecomm
