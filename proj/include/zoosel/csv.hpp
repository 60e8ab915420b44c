#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace zoosel::csv {

// Splits one RFC 4180 record. Quoted fields may contain commas and "" escapes;
// embedded newlines are not supported.
std::vector<std::string> split_record(std::string_view line);

// Quotes a field only when it needs it.
std::string escape_field(std::string_view field);

// Non-empty lines with trailing '\r' removed; a leading UTF-8 BOM is skipped.
std::vector<std::string_view> lines(std::string_view text);

}  // namespace zoosel::csv
