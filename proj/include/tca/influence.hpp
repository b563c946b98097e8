#pragma once

#include "tca/predictors.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace tca {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr std::size_t kMaxLevelSetCells = 8;
inline constexpr double kDefaultPrefilterRatio = 0.8;

/// Alarm rule firing when z < theta_minus or z > theta_plus. Infinite
/// thresholds switch one side off.
struct TwoSidedPredictor {
    double theta_minus = -kInf;
    double theta_plus = kInf;
    double power = 0.0;
    double p1 = 0.0;
    double p0 = 1.0;

    bool fires(double z) const noexcept { return z < theta_minus || z > theta_plus; }
    double false_alarm_rate() const noexcept { return 1.0 - p0; }
};

/// Searches the two-sided family with thresholds drawn from the observed z
/// values plus -inf/+inf and returns a quality maximiser. Ties prefer higher
/// p0, then the wider normal region theta_plus - theta_minus.
///
/// With `pin_lower_at_zero` (non-negative anomaly intensities) theta_minus is
/// fixed at 0 and theta_plus ranges over observed values >= 0 and +inf, so
/// theta_plus = 0 is allowed and means "any non-zero intensity".
///
/// Returns the never-firing predictor with power 0 when y has no ones or z
/// has fewer than two distinct values.
TwoSidedPredictor fit_two_sided(std::span<const double> z, std::span<const std::uint8_t> y,
                                const QualityFn& qf, bool pin_lower_at_zero = false);

Bits binarize_factor(const TwoSidedPredictor& predictor, std::span<const double> z);

/// Level-set predictor over a discretised factor (at most 8 cells).
struct LevelSetPredictor {
    std::vector<int> cells;   // distinct cell ids, ascending
    std::vector<double> vhat; // empirical P(Z = cell, Y = 1), aligned with cells
    double c_star = kInf;     // fires on cells with vhat >= c_star
    double power = 0.0;
    double p1 = 0.0;
    double p0 = 1.0;
    std::size_t candidates = 0;  // thresholds explored

    bool fires(int cell) const;
};

/// Candidate thresholds are the distinct non-zero vhat values; ties keep the
/// largest threshold. Throws DomainError for more than 8 cells or length
/// mismatch.
LevelSetPredictor fit_level_set(std::span<const int> cells, std::span<const std::uint8_t> y,
                                const QualityFn& qf);

/// Boolean combiners m with m(0,0) = 0 and m(1,1) = 1, in tie-break order.
enum class Combiner : std::uint8_t { And, Or, First, Second };

inline constexpr std::array<Combiner, 4> kAcceleratedCombiners = {
    Combiner::And, Combiner::Or, Combiner::First, Combiner::Second};

std::string_view combiner_name(Combiner combiner);

constexpr bool combine(Combiner combiner, bool f, bool g) {
    switch (combiner) {
        case Combiner::And: return f && g;
        case Combiner::Or: return f || g;
        case Combiner::First: return f;
        case Combiner::Second: return g;
    }
    return false;
}

struct Fusion {
    Combiner combiner = Combiner::And;
    double power = 0.0;
    double p1 = 0.0;
    double p0 = 1.0;
};

/// Best of the four accelerated combiners; ties follow AND > OR > FIRST > SECOND.
Fusion fuse_pair(std::span<const std::uint8_t> f_bits, std::span<const std::uint8_t> g_bits,
                 std::span<const std::uint8_t> y, const QualityFn& qf);

struct PairPredictor {
    TwoSidedPredictor first;
    TwoSidedPredictor second;
    Combiner combiner = Combiner::And;
    double power = 0.0;
    double p1 = 0.0;
    double p0 = 1.0;

    bool fires(double z1, double z2) const {
        return combine(combiner, first.fires(z1), second.fires(z2));
    }
};

struct SingleInfluence {
    TwoSidedPredictor predictor;
    double influence = 0.0;
};

SingleInfluence influence_single(std::span<const double> z, std::span<const std::uint8_t> y,
                                 const QualityFn& qf, bool is_anomaly_factor = false);

/// Picks the predictor a factor contributes to pair fusion: its single-factor
/// optimum when that clears the pre-filter floor, otherwise (floor quality
/// only) the optimum under the lowered floor. nullopt when neither clears it.
std::optional<TwoSidedPredictor> pair_component(const TwoSidedPredictor& single_fit,
                                                std::span<const double> z,
                                                std::span<const std::uint8_t> y,
                                                const QualityFn& qf, double prefilter_floor,
                                                bool is_anomaly_factor);

struct PairInfluence {
    PairPredictor predictor;
    double influence = 0.0;
};

/// Fits both components, applies the pre-filter, binarises and fuses.
/// nullopt when a component fails the pre-filter (group not admitted).
std::optional<PairInfluence> influence_pair(std::span<const double> z1, std::span<const double> z2,
                                            std::span<const std::uint8_t> y, const QualityFn& qf,
                                            double prefilter_floor, bool z1_is_anomaly = false,
                                            bool z2_is_anomaly = false);

/// Fuses two already-admitted components over the same rows.
PairInfluence fuse_components(const TwoSidedPredictor& first, const TwoSidedPredictor& second,
                              std::span<const double> z1, std::span<const double> z2,
                              std::span<const std::uint8_t> y, const QualityFn& qf);

/// Guards the group cardinality: 1 and 2 are supported, anything else throws
/// GroupSizeError.
void check_group_size(std::size_t size);

}  // namespace tca
