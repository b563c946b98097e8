#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tca {

/// Trading order identifier, 1-based and stable across slices.
struct OrderId {
    int value = 0;

    friend auto operator<=>(const OrderId&, const OrderId&) = default;
};

/// The seven basic market descriptors. The last three are rarity scores; in
/// raw (pre-enrichment) data their columns hold the underlying raw series.
enum class Descriptor : std::uint8_t {
    Volatility,
    Spread,
    MomentumSpread,
    MomentumBp,
    VolumeScore,
    VolatilityScore,
    SpreadScore,
};

inline constexpr std::size_t kDescriptorCount = 7;

inline constexpr std::array<Descriptor, kDescriptorCount> kAllDescriptors = {
    Descriptor::Volatility,  Descriptor::Spread,          Descriptor::MomentumSpread,
    Descriptor::MomentumBp,  Descriptor::VolumeScore,     Descriptor::VolatilityScore,
    Descriptor::SpreadScore,
};

std::string_view descriptor_name(Descriptor d);
std::optional<Descriptor> parse_descriptor(std::string_view name);

constexpr bool is_score(Descriptor d) {
    return d == Descriptor::VolumeScore || d == Descriptor::VolatilityScore ||
           d == Descriptor::SpreadScore;
}

constexpr std::size_t index_of(Descriptor d) { return static_cast<std::size_t>(d); }

/// Dense rows x cols matrix stored column-major so that one factor across all
/// active orders is a contiguous span.
class FactorMatrix {
public:
    FactorMatrix() = default;
    FactorMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t row, std::size_t col) const { return data_[col * rows_ + row]; }
    double& operator()(std::size_t row, std::size_t col) { return data_[col * rows_ + row]; }

    std::span<const double> column(std::size_t col) const {
        return {data_.data() + col * rows_, rows_};
    }
    std::span<double> column(std::size_t col) { return {data_.data() + col * rows_, rows_}; }

    friend bool operator==(const FactorMatrix&, const FactorMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// All active orders at one time slice. Raw slices carry the 7 descriptor
/// columns; enriched slices carry the 28 explanatory factors.
struct PortfolioSlice {
    int slice = 0;
    std::vector<OrderId> orders;  // sorted ascending
    FactorMatrix factors;         // orders.size() x {7 | 28}
    std::vector<double> pe;

    std::size_t active_count() const noexcept { return orders.size(); }

    friend bool operator==(const PortfolioSlice&, const PortfolioSlice&) = default;
};

using Portfolio = std::vector<PortfolioSlice>;

inline constexpr std::string_view kPortfolioCsvHeader =
    "slice,order,volatility,spread,momentum_spread,momentum_bp,volume_score_raw,"
    "volatility_score_raw,spread_score_raw,pe";

/// Parses the long CSV format. Throws ParseError, DuplicateRecordError or
/// OrderingError.
Portfolio load_portfolio(std::istream& in);
Portfolio load_portfolio_file(const std::string& path);

/// Writes raw (7-descriptor) slices in the long CSV format, rows ordered by
/// slice then order, floats in shortest round-trip form.
void write_portfolio(std::ostream& out, const Portfolio& portfolio);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

}  // namespace tca
