#include "upsilon/program_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace upsilon {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

}  // namespace

std::size_t hex_digits(std::size_t len) { return std::max<std::size_t>(1, (len + 3) / 4); }

std::string format_fixture_line(const BitString& bits) {
    static constexpr char kDigits[] = "0123456789ABCDEF";
    const std::size_t digits = hex_digits(bits.size());
    const std::size_t pad = digits * 4 - bits.size();
    std::string hex;
    unsigned v = 0;
    for (std::size_t i = 0; i < digits * 4; ++i) {
        v = (v << 1) | ((i >= pad && bits[i - pad]) ? 1u : 0u);
        if (i % 4 == 3) {
            hex.push_back(kDigits[v]);
            v = 0;
        }
    }
    return "len=" + std::to_string(bits.size()) + " hex=" + hex;
}

BitString parse_fixture_line(std::string_view line) {
    std::istringstream in{std::string(line)};
    std::string len_field, hex_field, extra;
    in >> len_field >> hex_field;
    if (len_field.rfind("len=", 0) != 0 || hex_field.rfind("hex=", 0) != 0 || (in >> extra))
        throw std::invalid_argument("fixture line must read 'len=<n> hex=<digits>': " + std::string(line));

    std::size_t len = 0;
    const char* first = len_field.data() + 4;
    const char* last = len_field.data() + len_field.size();
    auto [ptr, ec] = std::from_chars(first, last, len);
    if (ec != std::errc{} || ptr != last || first == last)
        throw std::invalid_argument("bad bit length in fixture line: " + std::string(line));

    const std::string hex = hex_field.substr(4);
    if (hex.size() != hex_digits(len))
        throw std::invalid_argument("hex digit count does not match len in: " + std::string(line));

    const std::size_t pad = hex.size() * 4 - len;
    BitString bits;
    for (std::size_t i = 0; i < hex.size(); ++i) {
        const int v = hex_value(hex[i]);
        if (v < 0) throw std::invalid_argument("bad hex digit in fixture line: " + std::string(line));
        for (int b = 3; b >= 0; --b) {
            const bool bit = ((v >> b) & 1) != 0;
            if (i * 4 + static_cast<std::size_t>(3 - b) >= pad)
                bits.push_back(bit);
            else if (bit)
                throw std::invalid_argument("value wider than len in fixture line: " + std::string(line));
        }
    }
    return bits;
}

std::vector<BitString> read_fixture_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fixture file " + path.string());
    std::vector<BitString> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        out.push_back(parse_fixture_line(line));
    }
    return out;
}

void write_fixture_file(const std::filesystem::path& path, const std::vector<EnvProgram>& programs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write fixture file " + path.string());
    for (const auto& p : programs) out << format_fixture_line(p.bits) << '\n';
}

}  // namespace upsilon
