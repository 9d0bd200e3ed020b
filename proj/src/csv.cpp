// SPDX-License-Identifier: Apache-2.0

#include "drgkit/csv.hpp"

#include "drgkit/errors.hpp"

namespace drg::csv {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

} // namespace

std::vector<Row> parse(std::string_view text) {
    std::vector<Row> rows;
    std::size_t i = 0;
    std::size_t line = 1;
    const std::size_t n = text.size();

    while (i < n) {
        // skip blank lines
        if (text[i] == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (text[i] == '\r' && i + 1 < n && text[i + 1] == '\n') {
            ++line;
            i += 2;
            continue;
        }

        Row row;
        row.line = line;
        std::string field;
        bool quoted = false;
        bool in_quotes = false;
        bool row_done = false;

        auto push_field = [&] {
            row.fields.push_back(quoted ? field : trim(field));
            field.clear();
            quoted = false;
        };

        while (i < n && !row_done) {
            char c = text[i];
            if (in_quotes) {
                if (c == '"') {
                    if (i + 1 < n && text[i + 1] == '"') {
                        field += '"';
                        i += 2;
                    } else {
                        in_quotes = false;
                        ++i;
                    }
                } else {
                    if (c == '\n') ++line;
                    field += c;
                    ++i;
                }
            } else {
                switch (c) {
                case '"':
                    if (!field.empty() && !quoted && !trim(field).empty())
                        throw ParseError("unexpected quote inside unquoted field", row.line);
                    in_quotes = true;
                    quoted = true;
                    field.clear(); // discard leading whitespace before the quote
                    ++i;
                    break;
                case ',':
                    push_field();
                    ++i;
                    break;
                case '\n':
                    ++line;
                    ++i;
                    row_done = true;
                    break;
                case '\r':
                    ++i; // swallowed; the '\n' (if any) ends the row
                    break;
                default:
                    field += c;
                    ++i;
                }
            }
        }
        if (in_quotes) throw ParseError("unterminated quoted field", row.line);
        push_field();
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string escape_field(std::string_view field) {
    bool needs_quotes = false;
    for (char c : field) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string write_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += escape_field(fields[i]);
    }
    return out;
}

} // namespace drg::csv
