#include "tca/detectors.hpp"

#include "tca/error.hpp"
#include "tca/keyvalue.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

namespace tca {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMadToSigma = 1.4826;

constexpr std::array<std::string_view, kAnomalyTypeCount> kTypeNames = {"peak", "jump", "trend"};

double median_at(std::span<const double> u, std::size_t i, int half_width) {
    const auto w = static_cast<std::size_t>(half_width);
    std::vector<double> window(u.begin() + static_cast<std::ptrdiff_t>(i - w),
                               u.begin() + static_cast<std::ptrdiff_t>(i + w + 1));
    return detail::median_of(std::move(window));
}

// Second difference scaled to unit variance under white noise; insensitive to
// level and slope, so the noise scale does not collapse along trends.
double curvature_at(std::span<const double> u, std::size_t i) {
    return (2.0 * u[i] - u[i - 1] - u[i + 1]) / std::sqrt(6.0);
}

// Robust scale of the defined residuals in (i - noise_window, i].
double noise_scale_at(std::span<const double> residual, std::size_t i, const BaselineParams& p) {
    const auto window = static_cast<std::size_t>(p.noise_window);
    const std::size_t first = i + 1 >= window ? i + 1 - window : 0;
    std::vector<double> r;
    r.reserve(window);
    for (std::size_t j = first; j <= i; ++j) {
        if (!std::isnan(residual[j])) r.push_back(residual[j]);
    }
    if (r.size() < static_cast<std::size_t>(p.min_noise_samples)) return kNaN;
    const double centre = detail::median_of(r);
    for (auto& v : r) v = std::abs(v - centre);
    return std::max(kMadToSigma * detail::median_of(std::move(r)), p.sigma_floor);
}

void require(bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid detector parameter: ") + what);
}

}  // namespace

std::string_view anomaly_type_name(AnomalyType type) {
    return kTypeNames[static_cast<std::size_t>(type)];
}

std::optional<AnomalyType> parse_anomaly_type(std::string_view name) {
    for (std::size_t i = 0; i < kAnomalyTypeCount; ++i) {
        if (kTypeNames[i] == name) return static_cast<AnomalyType>(i);
    }
    return std::nullopt;
}

void DetectorParams::validate() const {
    require(baseline.median_half_width >= 1, "baseline.median_half_width >= 1");
    require(baseline.noise_window >= 2, "baseline.noise_window >= 2");
    require(baseline.min_noise_samples >= 2 &&
                baseline.min_noise_samples <= baseline.noise_window,
            "2 <= baseline.min_noise_samples <= baseline.noise_window");
    require(baseline.sigma_floor > 0.0, "baseline.sigma_floor > 0");
    require(peak.min_duration >= 1, "peak.min_duration >= 1");
    require(peak.min_thickness > 0.0, "peak.min_thickness > 0");
    require(peak.min_height > 0.0, "peak.min_height > 0");
    require(peak.min_gap >= 1, "peak.min_gap >= 1");
    require(jump.window >= 3, "jump.window >= 3");
    require(jump.min_size > 0.0, "jump.min_size > 0");
    require(jump.max_residual > 0.0, "jump.max_residual > 0");
    require(trend.window >= 3, "trend.window >= 3");
    require(trend.min_slope_change > 0.0, "trend.min_slope_change > 0");
    require(trend.continuity > 0.0, "trend.continuity > 0");
    require(trend.max_residual > 0.0, "trend.max_residual > 0");
}

int DetectorParams::confirmation_delay(AnomalyType type) const {
    switch (type) {
        case AnomalyType::Peak: return baseline.median_half_width;
        case AnomalyType::Jump: return baseline.median_half_width + jump.window;
        case AnomalyType::Trend: return baseline.median_half_width + trend.window;
    }
    return 0;
}

bool set_detector_param(DetectorParams& p, const ConfigLine& line) {
    const auto& k = line.key;
    auto as_int = [&] { return static_cast<int>(config_to_integer(line)); };
    if (k == "baseline.median_half_width") p.baseline.median_half_width = as_int();
    else if (k == "baseline.noise_window") p.baseline.noise_window = as_int();
    else if (k == "baseline.min_noise_samples") p.baseline.min_noise_samples = as_int();
    else if (k == "baseline.sigma_floor") p.baseline.sigma_floor = config_to_real(line);
    else if (k == "peak.min_duration") p.peak.min_duration = as_int();
    else if (k == "peak.min_thickness") p.peak.min_thickness = config_to_real(line);
    else if (k == "peak.min_height") p.peak.min_height = config_to_real(line);
    else if (k == "peak.min_gap") p.peak.min_gap = as_int();
    else if (k == "jump.window") p.jump.window = as_int();
    else if (k == "jump.min_size") p.jump.min_size = config_to_real(line);
    else if (k == "jump.max_residual") p.jump.max_residual = config_to_real(line);
    else if (k == "trend.window") p.trend.window = as_int();
    else if (k == "trend.min_slope_change") p.trend.min_slope_change = config_to_real(line);
    else if (k == "trend.continuity") p.trend.continuity = config_to_real(line);
    else if (k == "trend.max_residual") p.trend.max_residual = config_to_real(line);
    else return false;
    return true;
}

DetectorParams parse_detector_params(std::istream& in) {
    DetectorParams p;
    for (const auto& line : read_config_lines(in)) {
        if (!line.is_assignment) throw ParseError(line.line, "expected 'key = value'");
        if (!set_detector_param(p, line)) {
            throw ParseError(line.line, "unknown detector parameter '" + line.key + "'");
        }
    }
    p.validate();
    return p;
}

DetectorParams load_detector_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open detector config '" + path + "'");
    return parse_detector_params(in);
}

QuadraticFit fit_quadratic(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);

    // Normal equations in the centred abscissa t = x - mean.
    std::array<double, 5> s{};
    std::array<double, 3> rhs{};
    for (std::size_t i = 0; i < n; ++i) {
        const double t = x[i] - mean;
        double tp = 1.0;
        for (std::size_t k = 0; k < 5; ++k) {
            s[k] += tp;
            if (k < 3) rhs[k] += tp * y[i];
            tp *= t;
        }
    }
    std::array<std::array<double, 4>, 3> m = {{
        {s[0], s[1], s[2], rhs[0]},
        {s[1], s[2], s[3], rhs[1]},
        {s[2], s[3], s[4], rhs[2]},
    }};
    for (std::size_t col = 0; col < 3; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < 3; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        }
        std::swap(m[col], m[pivot]);
        for (std::size_t r = col + 1; r < 3; ++r) {
            const double f = m[r][col] / m[col][col];
            for (std::size_t c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
        }
    }
    std::array<double, 3> coef{};
    for (std::size_t i = 3; i-- > 0;) {
        double acc = m[i][3];
        for (std::size_t c = i + 1; c < 3; ++c) acc -= m[i][c] * coef[c];
        coef[i] = acc / m[i][i];
    }

    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = x[i] - mean;
        const double e = y[i] - (coef[0] + coef[1] * t + coef[2] * t * t);
        ssr += e * e;
    }
    const double t0 = -mean;
    return {coef[0] + coef[1] * t0 + coef[2] * t0 * t0, coef[1] + 2.0 * coef[2] * t0,
            std::sqrt(ssr / static_cast<double>(n))};
}

namespace detail {

double median_of(std::vector<double> values) {
    const std::size_t n = values.size();
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (n % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(values.begin(), mid);
    return 0.5 * (lower + upper);
}

std::optional<SplitFit> split_fit(std::span<const double> level, std::span<const double> sigma,
                                  std::size_t s, int window) {
    const auto L = static_cast<std::size_t>(window);
    if (s < L + 1 || s + L >= level.size() || std::isnan(sigma[s])) return std::nullopt;

    std::vector<double> x(L + 1);
    std::vector<double> left(L + 1);
    std::vector<double> right(L + 1);
    for (std::size_t j = 0; j <= L; ++j) {
        left[j] = level[s - 1 - L + j];
        right[j] = level[s + j];
        if (std::isnan(left[j]) || std::isnan(right[j])) return std::nullopt;
    }
    SplitFit fit;
    for (std::size_t j = 0; j <= L; ++j) x[j] = -static_cast<double>(L + 1 - j);
    fit.left = fit_quadratic(x, left);
    for (std::size_t j = 0; j <= L; ++j) x[j] = static_cast<double>(j);
    fit.right = fit_quadratic(x, right);
    fit.sigma = sigma[s];
    return fit;
}

double jump_intensity(const SplitFit& fit, const JumpParams& params) {
    const double limit = params.max_residual * fit.sigma;
    if (fit.left.rms_residual > limit || fit.right.rms_residual > limit) return 0.0;
    const double size = std::abs(fit.right.value - fit.left.value);
    return size > params.min_size * fit.sigma ? size / fit.sigma : 0.0;
}

double trend_intensity(const SplitFit& fit, const TrendParams& params) {
    const double limit = params.max_residual * fit.sigma;
    if (fit.left.rms_residual > limit || fit.right.rms_residual > limit) return 0.0;
    if (std::abs(fit.right.value - fit.left.value) >= params.continuity * fit.sigma) return 0.0;
    const double change = std::abs(fit.right.slope - fit.left.slope);
    const double unit = params.min_slope_change * fit.sigma;
    return change > unit ? change / unit : 0.0;
}

double PeakTracker::step(double u, double level, double sigma, std::ptrdiff_t index) {
    const bool defined = !std::isnan(level) && !std::isnan(sigma);
    const double height = defined ? (u - level) / sigma : 0.0;
    if (!defined || !(height > params_.min_height)) {
        in_run_ = false;
        return 0.0;
    }
    if (!in_run_) {
        in_run_ = true;
        suppressed_ = last_detection_ && index - *last_detection_ < params_.min_gap;
        broken_ = false;
        run_min_ = run_max_ = u;
        height_sum_ = 0.0;
        count_ = 0;
    }
    run_min_ = std::min(run_min_, u);
    run_max_ = std::max(run_max_, u);
    height_sum_ += height;
    ++count_;
    if (run_max_ - run_min_ > params_.min_thickness * sigma) broken_ = true;
    if (suppressed_ || broken_ || count_ < params_.min_duration) return 0.0;
    last_detection_ = index;
    return height_sum_ / count_;
}

}  // namespace detail

Baseline baseline(std::span<const double> u, const BaselineParams& params) {
    const std::size_t n = u.size();
    const auto w = static_cast<std::size_t>(params.median_half_width);
    Baseline out{std::vector<double>(n, kNaN), std::vector<double>(n, kNaN)};
    std::vector<double> residual(n, kNaN);
    for (std::size_t i = w; i + w < n; ++i) {
        out.level[i] = median_at(u, i, params.median_half_width);
        residual[i] = curvature_at(u, i);
        out.sigma[i] = noise_scale_at(residual, i, params);
    }
    return out;
}

std::vector<double> detect_peaks_crenels(std::span<const double> u, std::span<const double> level,
                                         std::span<const double> sigma, const PeakParams& params) {
    std::vector<double> out(u.size(), 0.0);
    detail::PeakTracker tracker(params);
    for (std::size_t i = 0; i < u.size(); ++i) {
        out[i] = tracker.step(u[i], level[i], sigma[i], static_cast<std::ptrdiff_t>(i));
    }
    return out;
}

std::vector<double> detect_jumps(std::span<const double> u, std::span<const double> level,
                                 std::span<const double> sigma, const JumpParams& params) {
    std::vector<double> out(u.size(), 0.0);
    for (std::size_t s = 0; s < u.size(); ++s) {
        if (const auto fit = detail::split_fit(level, sigma, s, params.window)) {
            out[s] = detail::jump_intensity(*fit, params);
        }
    }
    return out;
}

std::vector<double> detect_trend_changes(std::span<const double> u, std::span<const double> level,
                                         std::span<const double> sigma, const TrendParams& params) {
    std::vector<double> out(u.size(), 0.0);
    for (std::size_t s = 0; s < u.size(); ++s) {
        if (const auto fit = detail::split_fit(level, sigma, s, params.window)) {
            out[s] = detail::trend_intensity(*fit, params);
        }
    }
    return out;
}

std::vector<double> smooth_intensity(std::span<const double> a, int tau) {
    if (tau < 0) throw DomainError("smoothing scale must be non-negative");
    std::vector<double> out(a.size());
    const auto span = static_cast<std::size_t>(tau);
    for (std::size_t t = 0; t < a.size(); ++t) {
        const std::size_t first = t >= span ? t - span : 0;
        out[t] = *std::max_element(a.begin() + static_cast<std::ptrdiff_t>(first),
                                   a.begin() + static_cast<std::ptrdiff_t>(t + 1));
    }
    return out;
}

const std::optional<SeriesDetector::Finalized>& SeriesDetector::Emission::of(
    AnomalyType type) const {
    switch (type) {
        case AnomalyType::Peak: return peak;
        case AnomalyType::Jump: return jump;
        case AnomalyType::Trend: return trend;
    }
    return peak;
}

SeriesDetector::SeriesDetector(const DetectorParams& params) : params_(params), peaks_(params.peak) {
    params_.validate();
}

SeriesDetector::Emission SeriesDetector::push(double u) {
    u_.push_back(u);
    level_.push_back(kNaN);
    residual_.push_back(kNaN);
    sigma_.push_back(kNaN);

    Emission emission;
    const auto w = static_cast<std::size_t>(params_.baseline.median_half_width);
    const std::size_t n = u_.size();
    if (n < w + 1) return emission;

    // The centred median at i = n-1-w has just become available.
    const std::size_t i = n - 1 - w;
    if (i >= w) {
        level_[i] = median_at(u_, i, params_.baseline.median_half_width);
        residual_[i] = curvature_at(u_, i);
        sigma_[i] = noise_scale_at(residual_, i, params_.baseline);
    }
    emission.peak = Finalized{
        i, peaks_.step(u_[i], level_[i], sigma_[i], static_cast<std::ptrdiff_t>(i))};

    const auto jl = static_cast<std::size_t>(params_.jump.window);
    if (i >= jl) {
        const std::size_t s = i - jl;
        const auto fit = detail::split_fit(level_, sigma_, s, params_.jump.window);
        emission.jump = Finalized{s, fit ? detail::jump_intensity(*fit, params_.jump) : 0.0};
    }
    const auto tl = static_cast<std::size_t>(params_.trend.window);
    if (i >= tl) {
        const std::size_t s = i - tl;
        const auto fit = detail::split_fit(level_, sigma_, s, params_.trend.window);
        emission.trend = Finalized{s, fit ? detail::trend_intensity(*fit, params_.trend) : 0.0};
    }
    return emission;
}

}  // namespace tca
