#pragma once

// Minimal CSV plumbing shared by the trace, bench and dataset writers.
// Fields never contain commas or quotes, so no quoting is done.

#include <string>
#include <string_view>
#include <vector>

namespace ricl {

/// Shortest representation that parses back to the same double; "nan",
/// "inf" and "-inf" for non-finite values.
std::string format_double(double v);

/// Parses a full field as a double (accepting the non-finite spellings
/// above). Throws kSchemaError on trailing garbage.
double parse_double(std::string_view field);

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');

}  // namespace ricl
