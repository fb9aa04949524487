#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mutcausal::csv {

// Splits one CSV line (RFC 4180 quoting, no embedded newlines).
// Returns false on an unterminated quote.
bool split_line(std::string_view line, std::vector<std::string>& fields);

// Quotes the field only when it contains a delimiter, quote or newline.
std::string escape(std::string_view field);

// Strips a trailing '\r' and a leading UTF-8 byte-order mark.
std::string_view clean_line(std::string_view line, bool first_line);

} // namespace mutcausal::csv
