#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tabser {

/// Renders a finite double the way the serializers print numbers: integers
/// without a decimal point, everything else as the shortest decimal string
/// that round-trips.
std::string format_number(double value);

/// Number of maximal non-whitespace runs in `text`.
long long word_count(std::string_view text);

std::string trim(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);

/// Splits on a multi-character separator (e.g. "|||").
std::vector<std::string> split_on(std::string_view text, std::string_view sep);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with(std::string_view text, std::string_view prefix);
bool ends_with(std::string_view text, std::string_view suffix);

std::string to_lower(std::string_view text);

/// English list like "a", "a and b", "a, b, and c".
std::string join_natural(const std::vector<std::string>& items);

}  // namespace tabser
