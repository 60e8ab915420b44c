#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace zoosel {

using Json = nlohmann::json;

// Canonical text: object keys sorted, two-space indent, reals printed with
// 9 significant digits, trailing newline. Parsing the output and printing it
// again yields the same bytes.
std::string to_canonical(const Json& value);

// Formats one real the way to_canonical does.
std::string format_real(double value);

// nlohmann parse that throws ParseError with a context prefix.
Json parse_json(std::string_view text, std::string_view what);

}  // namespace zoosel
