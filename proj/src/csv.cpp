#include "toxlabel/csv.h"

#include "toxlabel/error.h"

namespace toxlabel::csv {

Reader::Reader(std::istream& in, char delimiter) : in_(in), delim_(delimiter) {}

int Reader::get() { return in_.get(); }
int Reader::peek() { return in_.peek(); }

std::optional<Row> Reader::next() {
  if (peek() == std::char_traits<char>::eof()) return std::nullopt;

  Row row;
  row.line = line_;
  std::string field;
  bool quoted = false;       // currently inside quotes
  bool was_quoted = false;   // current field started with a quote
  bool after_quote = false;  // a closing quote was seen for this field

  auto finish_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    was_quoted = false;
    after_quote = false;
  };

  for (;;) {
    int c = get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) {
        throw Error(ErrorCode::kFormatError, "unterminated quoted field starting on line " + std::to_string(row.line));
      }
      finish_field();
      return row;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (peek() == '"') {
          get();
          field.push_back('"');
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == delim_) {
      finish_field();
      continue;
    }
    if (ch == '\r' && peek() == '\n') continue;
    if (ch == '\n') {
      ++line_;
      finish_field();
      return row;
    }
    if (after_quote) {
      throw Error(ErrorCode::kFormatError,
                  "unexpected character after closing quote on line " + std::to_string(line_));
    }
    if (ch == '"' && field.empty() && !was_quoted) {
      quoted = true;
      was_quoted = true;
      continue;
    }
    field.push_back(ch);
  }
}

std::string escape_field(std::string_view field, char delimiter) {
  const bool needs_quotes = field.find_first_of(std::string{'"', '\r', '\n', delimiter}) != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_row(const std::vector<std::string>& fields, char delimiter) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out.push_back(delimiter);
    out += escape_field(fields[i], delimiter);
  }
  out += "\r\n";
  return out;
}

}  // namespace toxlabel::csv
