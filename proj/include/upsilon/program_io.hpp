#pragma once

// Program fixture files: one program per line, `len=<bits> hex=<digits>`.
// The hex digits spell the bit string read as a binary number (first bit most
// significant), left-padded with zero bits to whole digits: `len=13 hex=1A2B`
// is 1101000101011.
// Blank lines and lines starting with '#' are ignored.

#include "upsilon/machine.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace upsilon {

/// Hex digits used for a bit string of `len` bits (at least one).
std::size_t hex_digits(std::size_t len);

std::string format_fixture_line(const BitString& bits);
/// Throws std::invalid_argument on malformed lines or nonzero padding.
BitString parse_fixture_line(std::string_view line);

std::vector<BitString> read_fixture_file(const std::filesystem::path& path);
void write_fixture_file(const std::filesystem::path& path, const std::vector<EnvProgram>& programs);

}  // namespace upsilon
