// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#include "nodecomm/number_format.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace nodecomm
{

std::string format_double(double value)
{
  if (!std::isfinite(value))
  {
    throw std::invalid_argument("format_double: non-finite value");
  }
  if (value == 0.0)
  {
    return std::signbit(value) ? "-0" : "0";
  }
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::scientific);
  if (ec != std::errc{})
  {
    throw std::runtime_error("format_double: conversion failed");
  }
  std::string text(buf.data(), end);
  const auto e = text.find('e');
  std::string mantissa = text.substr(0, e);
  std::string exponent = text.substr(e + 1);
  bool negative = false;
  if (!exponent.empty() && (exponent[0] == '+' || exponent[0] == '-'))
  {
    negative = exponent[0] == '-';
    exponent.erase(0, 1);
  }
  const auto first = exponent.find_first_not_of('0');
  if (first == std::string::npos)
  {
    return mantissa;
  }
  return mantissa + "e" + (negative ? "-" : "") + exponent.substr(first);
}

}  // namespace nodecomm
