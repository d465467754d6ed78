// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <cmath>
#include <sstream>

#include "nodecomm/error.hpp"
#include "nodecomm/number_format.hpp"
#include "nodecomm/samples.hpp"

namespace nodecomm
{

std::string_view to_string(Ordering ordering)
{
  return ordering == Ordering::InOrder ? "in" : "reversed";
}

std::optional<Ordering> parse_ordering(std::string_view text)
{
  if (text == "in")
  {
    return Ordering::InOrder;
  }
  if (text == "reversed")
  {
    return Ordering::Reversed;
  }
  return std::nullopt;
}

namespace
{

std::vector<std::string> split_fields(const std::string &line)
{
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ','))
  {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? "" : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',')
  {
    fields.emplace_back();
  }
  return fields;
}

template <typename T>
T parse_unsigned(const std::string &text, std::size_t line_no, const char *name)
{
  T value{};
  const auto *end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end)
  {
    throw ParseError(line_no, std::string("malformed ") + name + " `" + text + "`");
  }
  return value;
}

double parse_seconds(const std::string &text, std::size_t line_no)
{
  double value = 0.0;
  const auto *end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value))
  {
    throw ParseError(line_no, "malformed seconds `" + text + "`");
  }
  if (value <= 0.0)
  {
    throw ParseError(line_no, "measured seconds must be positive");
  }
  return value;
}

}  // namespace

std::vector<TimingSample> load_samples(std::string_view text)
{
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<TimingSample> samples;
  while (std::getline(in, line))
  {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
    {
      line.pop_back();
    }
    if (line.find_first_not_of(" \t") == std::string::npos)
    {
      continue;
    }
    if (!header)
    {
      if (line != kSamplesHeader)
      {
        throw ParseError(line_no, "expected header `" + std::string(kSamplesHeader) + "`");
      }
      header = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 6)
    {
      throw ParseError(line_no, "expected 6 comma-separated fields");
    }
    TimingSample s;
    const auto loc = parse_locality(fields[0]);
    if (!loc)
    {
      throw ParseError(line_no, "unknown locality `" + fields[0] + "`");
    }
    s.locality = *loc;
    s.ppn = parse_unsigned<std::size_t>(fields[1], line_no, "ppn");
    s.size = parse_unsigned<Bytes>(fields[2], line_no, "size");
    s.n = parse_unsigned<std::uint64_t>(fields[3], line_no, "n");
    const auto ord = parse_ordering(fields[4]);
    if (!ord)
    {
      throw ParseError(line_no, "unknown ordering `" + fields[4] + "` (expected in|reversed)");
    }
    s.ordering = *ord;
    s.seconds = parse_seconds(fields[5], line_no);
    if (s.ppn < 1 || s.n < 1)
    {
      throw ParseError(line_no, "ppn and n must be at least 1");
    }
    samples.push_back(s);
  }
  if (!header)
  {
    throw ParseError(0, "sample file has no header");
  }
  return samples;
}

std::string save_samples(const std::vector<TimingSample> &samples)
{
  std::ostringstream out;
  out << kSamplesHeader << '\n';
  for (const auto &s : samples)
  {
    out << to_string(s.locality) << ',' << s.ppn << ',' << s.size << ',' << s.n << ','
        << to_string(s.ordering) << ',' << format_double(s.seconds) << '\n';
  }
  return out.str();
}

}  // namespace nodecomm
