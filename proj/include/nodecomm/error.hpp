// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nodecomm
{

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A parameter document violates its schema. `key()` names the offending entry.
class SchemaError : public Error
{
public:
  SchemaError(std::string key, const std::string &what)
    : Error("schema error at \"" + key + "\": " + what), key_(std::move(key))
  {
  }
  const std::string &key() const noexcept { return key_; }

private:
  std::string key_;
};

/// Malformed text input; `line()` is 1-based, 0 when not line-specific.
class ParseError : public Error
{
public:
  ParseError(std::size_t line, const std::string &what)
    : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line)
  {
  }
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class PatternError : public Error
{
public:
  using Error::Error;
};

class TopologyError : public Error
{
public:
  using Error::Error;
};

class TraceError : public Error
{
public:
  using Error::Error;
};

class FitError : public Error
{
public:
  using Error::Error;
};

}  // namespace nodecomm
