#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace autograder {

// Replaces every ill-formed UTF-8 sequence with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

// Reads a whole file as bytes. Throws GraderError(UnreadableFile).
std::string read_file(const std::filesystem::path& path);

// Splits on '\n', dropping one trailing '\r' per line. A trailing newline does
// not produce an extra empty line.
std::vector<std::string> split_lines(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace autograder
