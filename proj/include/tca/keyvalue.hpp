#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tca {

/// One meaningful line of a plain-text config file. Lines of the form
/// `key = value` have `is_assignment` set; anything else is kept as
/// whitespace-separated words. `#` starts a comment.
struct ConfigLine {
    std::size_t line = 0;
    bool is_assignment = false;
    std::string key;
    std::string value;
    std::vector<std::string> words;
};

std::vector<ConfigLine> read_config_lines(std::istream& in);

double config_to_real(const ConfigLine& line);
long long config_to_integer(const ConfigLine& line);
bool config_to_bool(const ConfigLine& line);

double word_to_real(std::string_view word, std::size_t line);
long long word_to_integer(std::string_view word, std::size_t line);

}  // namespace tca
