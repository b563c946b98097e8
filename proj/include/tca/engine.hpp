#pragma once

#include "tca/detectors.hpp"
#include "tca/factors.hpp"
#include "tca/influence.hpp"
#include "tca/portfolio.hpp"
#include "tca/predictors.hpp"
#include "tca/scores.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace tca {

struct EngineConfig {
    double q = kDefaultQuantile;
    double r = kDefaultFloorPower;
    int tau = 3;
    DetectorParams detectors;
    std::size_t score_window = kDefaultScoreWindow;
    std::size_t score_min_history = kDefaultScoreMinHistory;
    std::size_t min_orders = 100;
    bool pairs_enabled = true;
    QualityKind quality = QualityKind::FloorPower;
    double weight_u = 0.5;
    double prefilter_ratio = kDefaultPrefilterRatio;
    std::uint64_t seed = 0;
    /// When false, anomaly intensities are aligned on the slice they describe
    /// rather than the slice that confirms them (post-trade analysis only).
    bool causal = true;
    unsigned threads = 1;

    /// Throws ConfigError.
    void validate() const;

    QualityFn quality_fn() const;
    double prefilter_floor() const { return r * prefilter_ratio; }
};

/// Streaming factor enrichment: turns raw 7-descriptor slices into 28-factor
/// slices, keeping per-(order, descriptor) score and detector state. Slices
/// must arrive in increasing order.
///
/// Score factors are NaN while an order's history is cold. Anomaly factors are
/// the trailing max over tau+1 slices of intensities as confirmed online: an
/// intensity enters on the slice whose sample completes its detection window.
class Enricher {
public:
    explicit Enricher(EngineConfig config);

    PortfolioSlice push(const PortfolioSlice& raw);

private:
    struct SeriesState {
        explicit SeriesState(const DetectorParams& params) : detector(params) {}
        SeriesDetector detector;
        std::array<std::deque<std::pair<int, double>>, kAnomalyTypeCount> recent;
    };

    struct OrderState {
        std::vector<EcdfState> ecdf;
        std::vector<SeriesState> series;
    };

    OrderState& state_for(OrderId order);

    EngineConfig config_;
    std::map<OrderId, OrderState> orders_;
    std::optional<int> last_slice_;
};

/// Batch enrichment of a whole portfolio. Causal mode is exactly what the
/// streaming Enricher produces; offline mode uses look-ahead alignment.
Portfolio enrich(const Portfolio& raw, const EngineConfig& config);

struct GroupEntry {
    std::size_t group = 0;  // index into all_groups()
    bool admitted = true;   // pairs: both components passed the pre-filter
    double influence = 0.0;
    double p1 = 0.0;
    double p0 = 0.0;
    bool retained = false;
    std::size_t sample_size = 0;
    std::variant<std::monostate, TwoSidedPredictor, PairPredictor> predictor;

    double false_alarm_rate() const noexcept { return 1.0 - p0; }
};

struct AlarmZone {
    int slice = 0;
    std::size_t factor = 0;
    double theta_minus = 0.0;
    double theta_plus = 0.0;
    std::vector<OrderId> triggered;
};

struct InfluenceReport {
    int slice = 0;
    std::size_t active_orders = 0;
    std::optional<std::string> skipped;  // reason when the slice was not analysed
    double threshold = 0.0;
    std::size_t bad_orders = 0;
    std::size_t pair_evaluations = 0;
    std::vector<GroupEntry> entries;     // one per group, all_groups() order
    std::vector<std::size_t> retained;   // entry indices
    double max_influence = 0.0;
    std::vector<std::size_t> dominating; // entry indices
    std::vector<AlarmZone> alarm_zones;
};

InfluenceReport analyze_slice(const PortfolioSlice& slice, const EngineConfig& config);

/// Estimates one group on a slice; throws GroupSizeError for groups of three
/// or more factors.
GroupEntry estimate_group(const PortfolioSlice& slice, const BinarizedSlice& target,
                          std::span<const std::size_t> factors, const EngineConfig& config);

/// Enriches and analyses every slice in order.
std::vector<InfluenceReport> analyze_portfolio(const Portfolio& raw, const EngineConfig& config);

}  // namespace tca
