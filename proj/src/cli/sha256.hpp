#pragma once

#include <string>
#include <string_view>

namespace prominence::cli {

// FIPS 180-4 SHA-256 digest as lowercase hex.
std::string sha256_hex(std::string_view data);

// Streaming digest of a file's bytes. Throws when the file cannot be read.
std::string sha256_file(const std::string& path);

}  // namespace prominence::cli
