#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mobagg::csv {

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
// A trailing '\r' is dropped.
std::vector<std::string> split_line(std::string_view line);

// Field ready to write: quoted, with "" escapes, when it holds a comma,
// quote or line break; unchanged otherwise.
std::string quote(std::string_view field);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// Strict full-field parses; return false on any trailing garbage.
bool parse_double(std::string_view text, double& out);
bool parse_int64(std::string_view text, long long& out);
bool parse_uint64(std::string_view text, unsigned long long& out);

}  // namespace mobagg::csv
