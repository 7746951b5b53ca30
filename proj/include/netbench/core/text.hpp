#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace netbench::text {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char delimiter);
std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view separator);

/// POSIX-shell-like word splitting: whitespace separates words, single quotes
/// are literal, double quotes allow backslash escapes, quoted sections may
/// span lines. Returns nullopt on an unterminated quote. Never throws.
std::optional<std::vector<std::string>> shell_words(std::string_view line);

}  // namespace netbench::text
