#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace tca {

/// One bit per order, stored as bytes so that spans work.
using Bits = std::vector<std::uint8_t>;

inline constexpr double kDefaultQuantile = 0.03;
inline constexpr double kDefaultFloorPower = 0.85;

/// Performance binarized against the slice's q-quantile: y = 1 marks a bad
/// performance (PE strictly below the threshold).
struct BinarizedSlice {
    double threshold = 0.0;
    Bits y;
    bool degenerate = false;  // no bad performance at all

    std::size_t ones() const;
};

/// Nearest-rank q-quantile (the ceil(q K)-th smallest PE) and strict
/// comparison. Throws DomainError for empty input or q outside (0, 1).
BinarizedSlice binarize(std::span<const double> pe, double q);

/// Prediction x truth tally: n11 = (yhat=1, y=1), n10 = (yhat=1, y=0),
/// n01 = (yhat=0, y=1), n00 = (yhat=0, y=0).
struct ConfusionCounts {
    std::size_t n11 = 0;
    std::size_t n10 = 0;
    std::size_t n01 = 0;
    std::size_t n00 = 0;

    std::size_t total() const noexcept { return n11 + n10 + n01 + n00; }
    std::size_t positives() const noexcept { return n11 + n01; }
    std::size_t negatives() const noexcept { return n10 + n00; }

    /// P(yhat = 1 | y = 1); nullopt when y has no ones.
    std::optional<double> p1() const;
    /// P(yhat = 0 | y = 0); nullopt when y has no zeros.
    std::optional<double> p0() const;
    /// Empirical P(y = 1).
    double mu1() const;
    /// Absolute probabilities P(yhat = 1, y = 1) and P(yhat = 0, y = 0).
    double joint_p1() const;
    double joint_p0() const;

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Throws DomainError on length mismatch or empty input.
ConfusionCounts confusion(std::span<const std::uint8_t> yhat, std::span<const std::uint8_t> y);

enum class QualityKind : std::uint8_t { FloorPower, MinPP, Weighted };

std::string_view quality_kind_name(QualityKind kind);
std::optional<QualityKind> parse_quality_kind(std::string_view name);

/// Predictor quality functional.
///  - FloorPower(r): p1 when min(p1, p0) >= r, else 0 (conditional probabilities)
///  - MinPP: min(P1, P0) over absolute probabilities
///  - Weighted(u): u P1 + (1 - u) P0
class QualityFn {
public:
    static QualityFn floor_power(double r = kDefaultFloorPower);
    static QualityFn min_pp();
    static QualityFn weighted(double u);

    QualityKind kind() const noexcept { return kind_; }
    double parameter() const noexcept { return parameter_; }

    /// Quality of a predictor's confusion counts; 0 when p1 or p0 is undefined.
    double operator()(const ConfusionCounts& counts) const;

    /// Same family with a different floor, used for pair pre-filtering; r
    /// only needs to lie in (0, 1].
    QualityFn with_floor(double r) const;

private:
    QualityFn(QualityKind kind, double parameter) : kind_(kind), parameter_(parameter) {}

    QualityKind kind_;
    double parameter_;
};

double quality(const QualityFn& qf, const ConfusionCounts& counts);

/// Both conditional probabilities defined and at least r.
bool meets_floor(const ConfusionCounts& counts, double r);

/// Mutual information ratio (H(Z) + H(Y) - H(Z,Y)) / H(Y) from the empirical
/// 2x2 table, clamped to [0, 1]. Throws UndefinedError when H(Y) = 0.
double mir(std::span<const std::uint8_t> yhat, std::span<const std::uint8_t> y);
double mir(const ConfusionCounts& counts);
/// Same ratio for the table induced by P(y=1) = mu1 and the conditional
/// probabilities p1, p0.
double mir_from_rates(double mu1, double p1, double p0);

}  // namespace tca
