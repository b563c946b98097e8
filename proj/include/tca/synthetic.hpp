#pragma once

#include "tca/detectors.hpp"
#include "tca/portfolio.hpp"
#include "tca/scores.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tca {

/// Shape added to one (order, descriptor) series, in units of the noise sd:
/// peak adds m at the slice only, jump adds m from the slice on, trend adds
/// m * (u - slice) from the slice on.
struct AnomalyPlant {
    OrderId order;
    Descriptor descriptor = Descriptor::Volatility;
    AnomalyType type = AnomalyType::Peak;
    int slice = 0;
    double magnitude = 0.0;

    friend bool operator==(const AnomalyPlant&, const AnomalyPlant&) = default;
};

/// Orders whose factor value exceeds `level` on slices [first, last] get a
/// degraded PE.
struct DependencePlant {
    std::size_t factor = 0;
    int first = 0;
    int last = 0;
    double level = 0.0;

    friend bool operator==(const DependencePlant&, const DependencePlant&) = default;
};

struct SyntheticSpec {
    std::uint64_t seed = 0;
    std::size_t orders = 700;
    int slices = 79;
    double ar_coefficient = 0.5;
    double noise_sd = 1.0;
    /// Fraction of unplanted orders that start after slice 0 / stop before the
    /// last slice.
    double late_start = 0.0;
    double early_end = 0.0;
    double degraded_pe = -8.0;
    std::size_t score_window = kDefaultScoreWindow;
    std::size_t score_min_history = kDefaultScoreMinHistory;
    DetectorParams detectors;  // used to evaluate dependence plants on anomaly factors
    int tau = 3;
    std::vector<AnomalyPlant> anomalies;
    std::vector<DependencePlant> dependences;

    /// Throws SpecError.
    void validate() const;
};

/// Key/value lines plus `anomaly` and `dependence` plant lines; see README.
/// Throws ParseError or SpecError.
SyntheticSpec parse_synthetic_spec(std::istream& in);
SyntheticSpec load_synthetic_spec(const std::string& path);

struct GroundTruth {
    std::uint64_t seed = 0;
    std::vector<AnomalyPlant> anomalies;
    std::vector<DependencePlant> dependences;
    /// Per dependence plant and slice in its range, the orders whose PE was
    /// degraded, flattened as (plant index, slice, order).
    struct Degraded {
        std::size_t plant = 0;
        int slice = 0;
        OrderId order;
        friend bool operator==(const Degraded&, const Degraded&) = default;
    };
    std::vector<Degraded> degraded;

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct SyntheticPortfolio {
    Portfolio portfolio;  // raw 7-descriptor slices
    GroundTruth truth;
};

SyntheticPortfolio generate_synthetic(const SyntheticSpec& spec);

void write_ground_truth(std::ostream& out, const GroundTruth& truth);
GroundTruth read_ground_truth(std::istream& in);
GroundTruth load_ground_truth(const std::string& path);

}  // namespace tca
