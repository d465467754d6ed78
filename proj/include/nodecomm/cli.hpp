// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nodecomm::cli
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInputError = 2;

/// Runs one subcommand. `args` excludes the program name. Documents go to
/// `out` unless --out names a file; diagnostics go to `err`; `-` as an input
/// path reads `in`. Returns 0 on success and 2 on bad input.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err,
        std::istream &in);

}  // namespace nodecomm::cli
