#pragma once

// Matrix files.
//
// Canonical format (read/write) is a JSON object:
//   {"rows": R, "cols": C, "bitwidth": B, "signed": bool, "data": [row-major ints]}
// Matrix Market coordinate integer files are accepted read-only; absent
// entries are zero, and the bit-width and signedness are the narrowest that
// hold every entry.

#include "serialforge/matrix.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace serialforge {

nlohmann::json matrix_to_json(const IntMatrix& m);
IntMatrix matrix_from_json(const nlohmann::json& j);

/// Parses canonical JSON or Matrix Market text (detected by its banner).
IntMatrix parse_matrix(std::string_view text);

IntMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(const IntMatrix& m, const std::filesystem::path& path);

/// Whole-file helpers shared by the JSON readers.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Parse JSON text, mapping syntax errors to ParseError with a line number.
nlohmann::json parse_json(std::string_view text);

}  // namespace serialforge
