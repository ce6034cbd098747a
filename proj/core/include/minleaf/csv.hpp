#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace minleaf::csv {

/// A parsed RFC-4180 table: header row plus data rows of equal width.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Parses RFC-4180 text (quoted fields, doubled quotes, CRLF or LF line ends).
/// Throws DataError on ragged rows or an unterminated quote.
Table parse(std::istream& in);

/// Quotes a field when it contains a delimiter, quote or line break.
std::string escape(std::string_view field);

/// Writes one record terminated by "\n".
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace minleaf::csv
