#pragma once

// Small string helpers shared by the readers and writers.

#include <string>
#include <string_view>
#include <vector>

namespace amrsbmt {

std::vector<std::string> split_whitespace(std::string_view text);
std::vector<std::string> split(std::string_view text, char delimiter);
std::string join(const std::vector<std::string>& items, std::string_view separator);
std::string trim(std::string_view text);
std::string to_lower(std::string_view text);
bool starts_with(std::string_view text, std::string_view prefix);
bool ends_with(std::string_view text, std::string_view suffix);

// Round-trippable decimal rendering (%.17g, integers without exponent).
std::string format_number(double value);
double parse_number(std::string_view text);

// Escapes whitespace and backslashes so a token survives space-joined fields.
std::string escape_token(std::string_view token);
std::string unescape_token(std::string_view token);

}  // namespace amrsbmt
