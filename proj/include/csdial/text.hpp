#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace csdial::text {

std::string_view trim(std::string_view s);

// Trims and collapses internal runs of ASCII whitespace to a single space.
std::string normalize_space(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string to_lower_ascii(std::string_view s);
std::string replace_all(std::string s, std::string_view from, std::string_view to);

// Counts sentences delimited by runs of '.', '!' or '?'. Trailing text with no
// terminator counts as one sentence.
std::size_t count_sentences(std::string_view s);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

}  // namespace csdial::text

namespace csdial::fs {

std::string read_file(const std::filesystem::path& path);
// Writes via a sibling temporary file and rename, so readers never observe a
// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace csdial::fs
