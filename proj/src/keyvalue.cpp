#include "tca/keyvalue.hpp"

#include "tca/error.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>
#include <system_error>

namespace tca {

namespace {

std::string trimmed(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::vector<ConfigLine> read_config_lines(std::istream& in) {
    std::vector<ConfigLine> lines;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view text = raw;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) {
            text = text.substr(0, hash);
        }
        const auto body = trimmed(text);
        if (body.empty()) continue;

        ConfigLine line;
        line.line = line_no;
        if (const auto eq = body.find('='); eq != std::string::npos) {
            line.is_assignment = true;
            line.key = trimmed(std::string_view(body).substr(0, eq));
            line.value = trimmed(std::string_view(body).substr(eq + 1));
            if (line.key.empty()) throw ParseError(line_no, "missing key before '='");
        } else {
            std::istringstream words(body);
            for (std::string w; words >> w;) line.words.push_back(w);
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

double word_to_real(std::string_view word, std::size_t line) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
    if (word.empty() || ec != std::errc{} || ptr != word.data() + word.size() ||
        !std::isfinite(value)) {
        throw ParseError(line, "expected a finite number, got '" + std::string(word) + "'");
    }
    return value;
}

long long word_to_integer(std::string_view word, std::size_t line) {
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
    if (word.empty() || ec != std::errc{} || ptr != word.data() + word.size()) {
        throw ParseError(line, "expected an integer, got '" + std::string(word) + "'");
    }
    return value;
}

double config_to_real(const ConfigLine& line) { return word_to_real(line.value, line.line); }

long long config_to_integer(const ConfigLine& line) {
    return word_to_integer(line.value, line.line);
}

bool config_to_bool(const ConfigLine& line) {
    if (line.value == "true" || line.value == "1" || line.value == "yes") return true;
    if (line.value == "false" || line.value == "0" || line.value == "no") return false;
    throw ParseError(line.line, "expected a boolean, got '" + line.value + "'");
}

}  // namespace tca
