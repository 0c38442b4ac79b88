#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace toxlabel {

bool is_valid_utf8(std::string_view bytes);

// Number of Unicode scalar values; assumes valid UTF-8.
std::size_t codepoint_count(std::string_view utf8);

std::string_view trim(std::string_view s);
std::string ascii_lower(std::string_view s);

// A percentage held as an exact count of hundredths of a point (48.03% == 4803).
// Ratios are rounded half-up in integer arithmetic so reports are reproducible.
struct Percent {
  std::int64_t hundredths = 0;

  static Percent from_ratio(std::int64_t numerator, std::int64_t denominator);
  double value() const { return static_cast<double>(hundredths) / 100.0; }
  std::string to_string() const;  // "48.03", "-5.54"

  friend Percent operator-(Percent a, Percent b) { return {a.hundredths - b.hundredths}; }
  friend auto operator<=>(const Percent&, const Percent&) = default;
};

// Half-up rounding of a real value to a fixed number of decimals. Representation
// noise below 1e-9 of a unit in the last place is ignored, so 43.165 -> 43.17.
double round_half_up(double value, int decimals);

// Fixed-point rendering after round_half_up, e.g. format_fixed(0.84479, 2) == "0.84".
std::string format_fixed(double value, int decimals);

}  // namespace toxlabel
