// Copyright The nodecomm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

namespace nodecomm
{

// Shortest round-trip decimal text in scientific form with a bare exponent:
// 8.4e-9 -> "8.4e-9", 2.2e9 -> "2.2e9", 1.5 -> "1.5". Parsing the result with
// strtod yields the same bit pattern.
std::string format_double(double value);

}  // namespace nodecomm
