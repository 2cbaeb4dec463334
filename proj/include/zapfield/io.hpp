#pragma once

#include <string>

namespace zapfield::io {

// 17 significant digits, enough to round-trip a double exactly
std::string format_double(double v);

// temp file + rename, so interrupted runs never leave truncated output
void atomic_write(const std::string& path, const std::string& content);

}  // namespace zapfield::io
