#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toxlabel::csv {

struct Row {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based physical line where the row starts
};

// Streaming RFC-4180 reader: quoted fields may contain the delimiter, doubled
// quotes and line breaks. Both LF and CRLF terminators are accepted.
class Reader {
 public:
  Reader(std::istream& in, char delimiter);

  // Next row, or nullopt at end of input. Throws Error(kFormatError) on an
  // unterminated quoted field or stray characters after a closing quote.
  std::optional<Row> next();

 private:
  int get();
  int peek();

  std::istream& in_;
  char delim_;
  std::size_t line_ = 1;
};

// Quotes a field when it contains the delimiter, a quote, CR or LF.
std::string escape_field(std::string_view field, char delimiter = ',');
std::string format_row(const std::vector<std::string>& fields, char delimiter = ',');

}  // namespace toxlabel::csv
