#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tca {

enum class AnomalyType : std::uint8_t { Peak, Jump, Trend };

inline constexpr std::size_t kAnomalyTypeCount = 3;

std::string_view anomaly_type_name(AnomalyType type);
std::optional<AnomalyType> parse_anomaly_type(std::string_view name);

struct BaselineParams {
    int median_half_width = 3;  // w_b: median window is 2*w_b+1 samples
    int noise_window = 20;      // w_sigma
    int min_noise_samples = 5;  // second differences needed before sigma is defined
    double sigma_floor = 1e-9;
};

/// Thresholds for peaks/crenels; heights and thickness in sigma units.
struct PeakParams {
    int min_duration = 1;
    double min_thickness = 2.0;  // flat-top tolerance on run max - min
    double min_height = 4.0;
    int min_gap = 3;
};

struct JumpParams {
    int window = 6;  // L
    double min_size = 4.0;
    double max_residual = 1.5;
};

/// Slope change and continuity are measured in sigma units per slice.
struct TrendParams {
    int window = 6;  // L
    double min_slope_change = 2.5;
    double continuity = 2.0;
    double max_residual = 2.5;
};

struct DetectorParams {
    BaselineParams baseline;
    PeakParams peak;
    JumpParams jump;
    TrendParams trend;

    /// Throws ConfigError on out-of-range values.
    void validate() const;

    /// Number of further samples that must arrive before the intensity at a
    /// given index is final.
    int confirmation_delay(AnomalyType type) const;
};

/// Reads `section.key = value` lines (sections: baseline, peak, jump, trend).
/// Unknown keys are errors; missing keys keep their defaults.
DetectorParams parse_detector_params(std::istream& in);
DetectorParams load_detector_params(const std::string& path);

struct ConfigLine;
/// Applies one `section.key = value` line; false when the key is unknown.
bool set_detector_param(DetectorParams& params, const ConfigLine& line);

/// Centered moving median and robust noise scale. sigma is 1.4826 x MAD of
/// the scaled second differences (2u_i - u_{i-1} - u_{i+1}) / sqrt(6) over the
/// trailing noise window. Entries are NaN where the full median window or
/// enough noise samples are not available.
struct Baseline {
    std::vector<double> level;
    std::vector<double> sigma;
};

Baseline baseline(std::span<const double> u, const BaselineParams& params);

std::vector<double> detect_peaks_crenels(std::span<const double> u, std::span<const double> level,
                                         std::span<const double> sigma, const PeakParams& params);

std::vector<double> detect_jumps(std::span<const double> u, std::span<const double> level,
                                 std::span<const double> sigma, const JumpParams& params);

std::vector<double> detect_trend_changes(std::span<const double> u, std::span<const double> level,
                                         std::span<const double> sigma, const TrendParams& params);

/// Trailing maximum over tau+1 samples.
std::vector<double> smooth_intensity(std::span<const double> a, int tau);

/// Least-squares quadratic through (x_i, y_i), read at x = 0.
struct QuadraticFit {
    double value = 0.0;
    double slope = 0.0;
    double rms_residual = 0.0;
};

QuadraticFit fit_quadratic(std::span<const double> x, std::span<const double> y);

namespace detail {

double median_of(std::vector<double> values);

/// Left fit on level[s-1-L .. s-1], right fit on level[s .. s+L]; nullopt
/// when any needed level or sigma[s] is undefined.
struct SplitFit {
    QuadraticFit left;
    QuadraticFit right;
    double sigma = 0.0;
};
std::optional<SplitFit> split_fit(std::span<const double> level, std::span<const double> sigma,
                                  std::size_t s, int window);

double jump_intensity(const SplitFit& fit, const JumpParams& params);
double trend_intensity(const SplitFit& fit, const TrendParams& params);

/// Causal run tracker shared by the batch and online peak detectors.
class PeakTracker {
public:
    explicit PeakTracker(const PeakParams& params) : params_(params) {}

    double step(double u, double level, double sigma, std::ptrdiff_t index);

private:
    PeakParams params_;
    bool in_run_ = false;
    bool suppressed_ = false;
    bool broken_ = false;
    double run_min_ = 0.0;
    double run_max_ = 0.0;
    double height_sum_ = 0.0;
    int count_ = 0;
    std::optional<std::ptrdiff_t> last_detection_;
};

}  // namespace detail

/// Online pipeline for one series. Each push finalizes at most one intensity
/// per detector type, for an index that lags the newest sample by the
/// type's confirmation delay.
class SeriesDetector {
public:
    struct Finalized {
        std::size_t index = 0;
        double intensity = 0.0;
    };

    struct Emission {
        std::optional<Finalized> peak;
        std::optional<Finalized> jump;
        std::optional<Finalized> trend;

        const std::optional<Finalized>& of(AnomalyType type) const;
    };

    explicit SeriesDetector(const DetectorParams& params);

    Emission push(double u);

    std::size_t size() const noexcept { return u_.size(); }
    std::span<const double> level() const noexcept { return level_; }
    std::span<const double> sigma() const noexcept { return sigma_; }

private:
    DetectorParams params_;
    std::vector<double> u_;
    std::vector<double> level_;
    std::vector<double> residual_;
    std::vector<double> sigma_;
    detail::PeakTracker peaks_;
};

}  // namespace tca
