#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rankminer {

// A single word or a multi-word phrase, one token per element.
using Term = std::vector<std::string>;

std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_whitespace(std::string_view s);
std::string_view trim(std::string_view s);

// "battery life" -> {"battery", "life"}
Term parse_term(std::string_view text);
inline std::string term_text(const Term& t) { return join(t, " "); }

// Fixed-notation decimal with `digits` places; never locale-dependent.
std::string format_fixed(double v, int digits);
// Shortest-ish general notation with `significant` digits ("%.*g").
std::string format_general(double v, int significant);

// Resource text parsing. Blank lines and lines starting with '#' are skipped.
std::vector<std::string> content_lines(std::string_view text);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

} // namespace rankminer
