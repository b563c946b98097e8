#include "tca/predictors.hpp"

#include "tca/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace tca {

namespace {

double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

}  // namespace

std::size_t BinarizedSlice::ones() const {
    return static_cast<std::size_t>(std::count(y.begin(), y.end(), std::uint8_t{1}));
}

BinarizedSlice binarize(std::span<const double> pe, double q) {
    if (pe.empty()) throw DomainError("cannot binarize an empty slice");
    if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile fraction must lie in (0, 1)");

    std::vector<double> sorted(pe.begin(), pe.end());
    const auto k = static_cast<double>(sorted.size());
    // The epsilon absorbs representation error in q (0.03 * 700 is not exactly 21).
    auto rank = static_cast<std::size_t>(std::ceil(q * k - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    const auto nth = sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(sorted.begin(), nth, sorted.end());

    BinarizedSlice out;
    out.threshold = *nth;
    out.y.resize(pe.size());
    for (std::size_t i = 0; i < pe.size(); ++i) out.y[i] = pe[i] < out.threshold ? 1 : 0;
    out.degenerate = out.ones() == 0;
    return out;
}

std::optional<double> ConfusionCounts::p1() const {
    if (positives() == 0) return std::nullopt;
    return static_cast<double>(n11) / static_cast<double>(positives());
}

std::optional<double> ConfusionCounts::p0() const {
    if (negatives() == 0) return std::nullopt;
    return static_cast<double>(n00) / static_cast<double>(negatives());
}

double ConfusionCounts::mu1() const {
    return static_cast<double>(positives()) / static_cast<double>(total());
}

double ConfusionCounts::joint_p1() const {
    return static_cast<double>(n11) / static_cast<double>(total());
}

double ConfusionCounts::joint_p0() const {
    return static_cast<double>(n00) / static_cast<double>(total());
}

ConfusionCounts confusion(std::span<const std::uint8_t> yhat, std::span<const std::uint8_t> y) {
    if (yhat.size() != y.size()) throw DomainError("prediction and truth lengths differ");
    if (y.empty()) throw DomainError("confusion of empty vectors");
    ConfusionCounts c;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const bool predicted = yhat[i] != 0;
        const bool truth = y[i] != 0;
        if (predicted && truth) ++c.n11;
        else if (predicted) ++c.n10;
        else if (truth) ++c.n01;
        else ++c.n00;
    }
    return c;
}

std::string_view quality_kind_name(QualityKind kind) {
    switch (kind) {
        case QualityKind::FloorPower: return "floor";
        case QualityKind::MinPP: return "min";
        case QualityKind::Weighted: return "weighted";
    }
    return "floor";
}

std::optional<QualityKind> parse_quality_kind(std::string_view name) {
    if (name == "floor") return QualityKind::FloorPower;
    if (name == "min") return QualityKind::MinPP;
    if (name == "weighted") return QualityKind::Weighted;
    return std::nullopt;
}

QualityFn QualityFn::floor_power(double r) {
    if (!(r >= 0.70 && r <= 1.0)) throw DomainError("floor power r must lie in [0.70, 1.00]");
    return {QualityKind::FloorPower, r};
}

QualityFn QualityFn::min_pp() { return {QualityKind::MinPP, 0.0}; }

QualityFn QualityFn::weighted(double u) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("weight u must lie in (0, 1)");
    return {QualityKind::Weighted, u};
}

QualityFn QualityFn::with_floor(double r) const {
    if (kind_ != QualityKind::FloorPower) return *this;
    if (!(r > 0.0 && r <= 1.0)) throw DomainError("floor must lie in (0, 1]");
    return {QualityKind::FloorPower, r};
}

double QualityFn::operator()(const ConfusionCounts& counts) const {
    const auto p1 = counts.p1();
    const auto p0 = counts.p0();
    if (!p1 || !p0) return 0.0;
    switch (kind_) {
        case QualityKind::FloorPower:
            return std::min(*p1, *p0) >= parameter_ ? *p1 : 0.0;
        case QualityKind::MinPP:
            return std::min(counts.joint_p1(), counts.joint_p0());
        case QualityKind::Weighted:
            return parameter_ * counts.joint_p1() + (1.0 - parameter_) * counts.joint_p0();
    }
    return 0.0;
}

double quality(const QualityFn& qf, const ConfusionCounts& counts) { return qf(counts); }

bool meets_floor(const ConfusionCounts& counts, double r) {
    const auto p1 = counts.p1();
    const auto p0 = counts.p0();
    return p1 && p0 && std::min(*p1, *p0) >= r;
}

namespace {

// joint = {P(1,1), P(1,0), P(0,1), P(0,0)} indexed (yhat, y).
double mir_of_joint(const std::array<double, 4>& joint) {
    const double pz1 = joint[0] + joint[1];
    const double py1 = joint[0] + joint[2];
    const double hy = -plogp(py1) - plogp(1.0 - py1);
    if (!(hy > 0.0)) throw UndefinedError("mutual information ratio undefined: Y is deterministic");
    const double hz = -plogp(pz1) - plogp(1.0 - pz1);
    double hzy = 0.0;
    for (double p : joint) hzy -= plogp(p);
    return std::clamp((hz + hy - hzy) / hy, 0.0, 1.0);
}

}  // namespace

double mir(const ConfusionCounts& counts) {
    const auto n = static_cast<double>(counts.total());
    if (n == 0.0) throw UndefinedError("mutual information ratio of an empty table");
    return mir_of_joint({static_cast<double>(counts.n11) / n, static_cast<double>(counts.n10) / n,
                         static_cast<double>(counts.n01) / n, static_cast<double>(counts.n00) / n});
}

double mir_from_rates(double mu1, double p1, double p0) {
    if (!(mu1 >= 0.0 && mu1 <= 1.0 && p1 >= 0.0 && p1 <= 1.0 && p0 >= 0.0 && p0 <= 1.0)) {
        throw DomainError("mir_from_rates expects probabilities in [0, 1]");
    }
    return mir_of_joint({mu1 * p1, (1.0 - mu1) * (1.0 - p0), mu1 * (1.0 - p1), (1.0 - mu1) * p0});
}

double mir(std::span<const std::uint8_t> yhat, std::span<const std::uint8_t> y) {
    return mir(confusion(yhat, y));
}

}  // namespace tca
