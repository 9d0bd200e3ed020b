// SPDX-License-Identifier: Apache-2.0

#ifndef DRGKIT_CSV_HPP
#define DRGKIT_CSV_HPP

#include <string>
#include <string_view>
#include <vector>

namespace drg::csv {

struct Row {
    std::vector<std::string> fields;
    std::size_t line; // 1-based line number of the row start
};

/// Parse RFC 4180 CSV text. Quoted fields may contain commas, newlines
/// and doubled quotes; unquoted fields are trimmed of surrounding
/// whitespace. Empty lines between rows are skipped.
std::vector<Row> parse(std::string_view text);

/// Quote a field if it contains a comma, quote or newline.
std::string escape_field(std::string_view field);

/// Join fields into one CSV line (no trailing newline).
std::string write_row(const std::vector<std::string>& fields);

} // namespace drg::csv

#endif
