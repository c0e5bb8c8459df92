#pragma once

#include <string>
#include <vector>

namespace goaltm {

// Reads a whole file; MissingArtifactError when absent.
std::string read_file_bytes(const std::string& path);

// Writes through a sibling temp file followed by a rename, so readers never
// observe a half-written artifact.
void atomic_write_bytes(const std::string& path, const std::string& content);

std::string sha256_hex(const std::string& bytes);

// Splits on '\n', dropping a trailing empty segment. Keeps interior empty
// lines so callers can report line numbers accurately.
std::vector<std::string> split_lines(const std::string& text);

} // namespace goaltm
