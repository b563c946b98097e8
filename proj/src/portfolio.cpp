#include "tca/portfolio.hpp"

#include "tca/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <system_error>
#include <utility>

namespace tca {

namespace {

constexpr std::array<std::string_view, kDescriptorCount> kDescriptorNames = {
    "volatility",    "spread",          "momentum_spread", "momentum_bp",
    "volume_score",  "volatility_score", "spread_score",
};

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

int parse_int(std::string_view field, std::size_t line, std::string_view what) {
    field = trim(field);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError(line, "invalid " + std::string(what) + " '" + std::string(field) + "'");
    }
    return value;
}

double parse_real(std::string_view field, std::size_t line, std::string_view what) {
    field = trim(field);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError(line, "invalid " + std::string(what) + " '" + std::string(field) + "'");
    }
    if (!std::isfinite(value)) {
        throw ParseError(line, "non-finite " + std::string(what));
    }
    return value;
}

struct Row {
    OrderId order;
    std::array<double, kDescriptorCount> descriptors{};
    double pe = 0.0;
};

}  // namespace

std::string_view descriptor_name(Descriptor d) { return kDescriptorNames[index_of(d)]; }

std::optional<Descriptor> parse_descriptor(std::string_view name) {
    for (std::size_t i = 0; i < kDescriptorCount; ++i) {
        if (kDescriptorNames[i] == name) return static_cast<Descriptor>(i);
    }
    return std::nullopt;
}

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return {buf.data(), ptr};
}

Portfolio load_portfolio(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) return {};
    ++line_no;
    if (trim(line) != kPortfolioCsvHeader) {
        throw ParseError(line_no, "unexpected header");
    }

    std::map<int, std::vector<Row>> by_slice;
    std::set<std::pair<int, int>> seen;
    std::map<int, int> last_slice_of_order;

    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty()) continue;

        const auto fields = split_fields(text);
        if (fields.size() != 10) {
            throw ParseError(line_no, "expected 10 fields, got " + std::to_string(fields.size()));
        }
        const int slice = parse_int(fields[0], line_no, "slice");
        const int order = parse_int(fields[1], line_no, "order");
        if (slice < 0) throw ParseError(line_no, "negative slice index");
        if (order < 1) throw ParseError(line_no, "order ids start at 1");

        Row row;
        row.order = OrderId{order};
        for (std::size_t d = 0; d < kDescriptorCount; ++d) {
            row.descriptors[d] = parse_real(fields[2 + d], line_no, kDescriptorNames[d]);
        }
        row.pe = parse_real(fields[9], line_no, "pe");

        if (!seen.emplace(slice, order).second) {
            throw DuplicateRecordError("line " + std::to_string(line_no) + ": duplicate record for slice " +
                                       std::to_string(slice) + ", order " + std::to_string(order));
        }
        auto [it, inserted] = last_slice_of_order.try_emplace(order, slice);
        if (!inserted) {
            if (slice < it->second) {
                throw OrderingError("line " + std::to_string(line_no) + ": slice " +
                                    std::to_string(slice) + " after slice " +
                                    std::to_string(it->second) + " for order " +
                                    std::to_string(order));
            }
            it->second = slice;
        }
        by_slice[slice].push_back(row);
    }

    Portfolio portfolio;
    portfolio.reserve(by_slice.size());
    for (auto& [slice, rows] : by_slice) {
        std::sort(rows.begin(), rows.end(),
                  [](const Row& a, const Row& b) { return a.order < b.order; });
        PortfolioSlice s;
        s.slice = slice;
        s.factors = FactorMatrix(rows.size(), kDescriptorCount);
        s.orders.reserve(rows.size());
        s.pe.reserve(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            s.orders.push_back(rows[k].order);
            s.pe.push_back(rows[k].pe);
            for (std::size_t d = 0; d < kDescriptorCount; ++d) {
                s.factors(k, d) = rows[k].descriptors[d];
            }
        }
        portfolio.push_back(std::move(s));
    }
    return portfolio;
}

Portfolio load_portfolio_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open portfolio file '" + path + "'");
    return load_portfolio(in);
}

void write_portfolio(std::ostream& out, const Portfolio& portfolio) {
    out << kPortfolioCsvHeader << '\n';
    for (const auto& s : portfolio) {
        for (std::size_t k = 0; k < s.orders.size(); ++k) {
            out << s.slice << ',' << s.orders[k].value;
            for (std::size_t d = 0; d < kDescriptorCount; ++d) {
                out << ',' << format_double(s.factors(k, d));
            }
            out << ',' << format_double(s.pe[k]) << '\n';
        }
    }
}

}  // namespace tca
