#pragma once

#include <string_view>

#include "ueq/ast.hpp"

namespace ueq {

/// Parses a `.cos` program. Throws ParseError with the offending position.
Program parse_program(std::string_view source);

/// Parses a single query, e.g. for tests.
QueryPtr parse_query(std::string_view source);

} // namespace ueq
