#pragma once

#include <string>

#include "json.hpp"

namespace fraclab::jsonio {

using json = nlohmann::ordered_json;

// 12 significant digits, locale-independent, "-0" normalized to "0".
// Non-finite values are rejected: artifacts must never contain them.
std::string format_double(double v);

// Deterministic serialization: insertion-ordered keys, 2-space indent,
// doubles via format_double, trailing newline. Byte-identical output for
// equal inputs on every platform.
std::string canonical_dump(const json& j);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace fraclab::jsonio
