#include "tca/influence.hpp"

#include "tca/error.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

namespace tca {

namespace {

struct Tally {
    std::size_t ones = 0;
    std::size_t zeros = 0;
};

struct Candidate {
    double power = -1.0;
    double p0 = -1.0;
    double width = -1.0;
};

// Lexicographic (power, p0, width); strict so the earliest candidate wins ties.
bool better(const Candidate& a, const Candidate& b) {
    if (a.power != b.power) return a.power > b.power;
    if (a.p0 != b.p0) return a.p0 > b.p0;
    return a.width > b.width;
}

void check_lengths(std::size_t a, std::size_t b) {
    if (a != b) throw DomainError("factor and target lengths differ");
}

TwoSidedPredictor never_firing(bool pinned, std::span<const std::uint8_t> y) {
    TwoSidedPredictor p;
    p.theta_minus = pinned ? 0.0 : -kInf;
    p.theta_plus = kInf;
    const bool has_zero = std::find(y.begin(), y.end(), std::uint8_t{0}) != y.end();
    p.p0 = has_zero ? 1.0 : 0.0;
    return p;
}

}  // namespace

TwoSidedPredictor fit_two_sided(std::span<const double> z, std::span<const std::uint8_t> y,
                                const QualityFn& qf, bool pin_lower_at_zero) {
    check_lengths(z.size(), y.size());
    const std::size_t n = z.size();
    const auto total_ones =
        static_cast<std::size_t>(std::count_if(y.begin(), y.end(), [](auto b) { return b != 0; }));
    if (n < 2 || total_ones == 0) return never_firing(pin_lower_at_zero, y);
    const std::size_t total_zeros = n - total_ones;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return z[a] < z[b]; });

    // Distinct values ascending, with cumulative tallies below each.
    std::vector<double> values;
    std::vector<Tally> below;  // below[g] = tally of groups [0, g)
    below.push_back({});
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = order[i];
        if (values.empty() || z[k] != values.back()) {
            values.push_back(z[k]);
            below.push_back(below.back());
        }
        auto& t = below.back();
        (y[k] != 0 ? t.ones : t.zeros) += 1;
    }
    const std::size_t m = values.size();
    if (m < 2) return never_firing(pin_lower_at_zero, y);

    // Low side: threshold plus number of leading groups it fires on.
    struct Low {
        double theta;
        std::size_t fired_groups;
    };
    std::vector<Low> lows;
    if (pin_lower_at_zero) {
        const auto first_nonneg = static_cast<std::size_t>(
            std::lower_bound(values.begin(), values.end(), 0.0) - values.begin());
        lows.push_back({0.0, first_nonneg});
    } else {
        lows.push_back({-kInf, 0});
        for (std::size_t i = 0; i < m; ++i) lows.push_back({values[i], i});
    }

    TwoSidedPredictor best = never_firing(pin_lower_at_zero, y);
    Candidate best_key;
    auto consider = [&](double theta_minus, std::size_t low_groups, double theta_plus,
                        std::size_t high_first) {
        const Tally& lo = below[low_groups];
        const Tally& hi_excluded = below[high_first];
        ConfusionCounts c;
        c.n11 = lo.ones + (total_ones - hi_excluded.ones);
        c.n10 = lo.zeros + (total_zeros - hi_excluded.zeros);
        c.n01 = total_ones - c.n11;
        c.n00 = total_zeros - c.n10;
        const Candidate key{qf(c), c.p0().value_or(0.0), theta_plus - theta_minus};
        if (better(key, best_key)) {
            best_key = key;
            best.theta_minus = theta_minus;
            best.theta_plus = theta_plus;
            best.power = key.power;
            best.p1 = c.p1().value_or(0.0);
            best.p0 = key.p0;
        }
    };

    for (const auto& low : lows) {
        for (std::size_t j = 0; j < m; ++j) {
            const bool admissible = pin_lower_at_zero ? values[j] >= low.theta : values[j] > low.theta;
            if (!admissible) continue;
            consider(low.theta, low.fired_groups, values[j], j + 1);
        }
        consider(low.theta, low.fired_groups, kInf, m);
    }
    return best;
}

Bits binarize_factor(const TwoSidedPredictor& predictor, std::span<const double> z) {
    Bits out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = predictor.fires(z[i]) ? 1 : 0;
    return out;
}

bool LevelSetPredictor::fires(int cell) const {
    const auto it = std::lower_bound(cells.begin(), cells.end(), cell);
    if (it == cells.end() || *it != cell) return false;
    return vhat[static_cast<std::size_t>(it - cells.begin())] >= c_star;
}

LevelSetPredictor fit_level_set(std::span<const int> cells, std::span<const std::uint8_t> y,
                                const QualityFn& qf) {
    if (cells.size() != y.size()) throw DomainError("cell and target lengths differ");
    if (cells.empty()) throw DomainError("level-set fit on empty sample");

    std::map<int, Tally> tally;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        auto& t = tally[cells[i]];
        (y[i] != 0 ? t.ones : t.zeros) += 1;
    }
    if (tally.size() > kMaxLevelSetCells) {
        throw DomainError("level-set fit supports at most 8 cells, got " +
                          std::to_string(tally.size()));
    }

    LevelSetPredictor out;
    const auto n = static_cast<double>(cells.size());
    std::vector<std::size_t> ones;
    for (const auto& [cell, t] : tally) {
        out.cells.push_back(cell);
        out.vhat.push_back(static_cast<double>(t.ones) / n);
        ones.push_back(t.ones);
    }

    // Thresholds as distinct non-zero one-counts, largest first.
    std::vector<std::size_t> thresholds;
    for (auto o : ones) {
        if (o > 0) thresholds.push_back(o);
    }
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    out.candidates = thresholds.size();

    const bool has_zero = std::any_of(tally.begin(), tally.end(),
                                      [](const auto& kv) { return kv.second.zeros > 0; });
    out.p0 = has_zero ? 1.0 : 0.0;

    double best_power = -1.0;
    for (const auto threshold : thresholds) {
        ConfusionCounts c;
        for (std::size_t i = 0; i < ones.size(); ++i) {
            const auto& t = tally[out.cells[i]];
            if (ones[i] >= threshold) {
                c.n11 += t.ones;
                c.n10 += t.zeros;
            } else {
                c.n01 += t.ones;
                c.n00 += t.zeros;
            }
        }
        const double power = qf(c);
        if (power > best_power) {
            best_power = power;
            out.c_star = static_cast<double>(threshold) / n;
            out.power = power;
            out.p1 = c.p1().value_or(0.0);
            out.p0 = c.p0().value_or(0.0);
        }
    }
    return out;
}

std::string_view combiner_name(Combiner combiner) {
    switch (combiner) {
        case Combiner::And: return "and";
        case Combiner::Or: return "or";
        case Combiner::First: return "first";
        case Combiner::Second: return "second";
    }
    return "and";
}

Fusion fuse_pair(std::span<const std::uint8_t> f_bits, std::span<const std::uint8_t> g_bits,
                 std::span<const std::uint8_t> y, const QualityFn& qf) {
    if (f_bits.size() != y.size() || g_bits.size() != y.size()) {
        throw DomainError("fusion inputs differ in length");
    }
    // table[f][g] tallies the truth per joint component vote.
    std::array<std::array<Tally, 2>, 2> table{};
    for (std::size_t i = 0; i < y.size(); ++i) {
        auto& t = table[f_bits[i] != 0][g_bits[i] != 0];
        (y[i] != 0 ? t.ones : t.zeros) += 1;
    }

    Fusion best;
    bool first = true;
    for (const auto combiner : kAcceleratedCombiners) {
        ConfusionCounts c;
        for (int f = 0; f < 2; ++f) {
            for (int g = 0; g < 2; ++g) {
                const auto& t = table[f][g];
                if (combine(combiner, f != 0, g != 0)) {
                    c.n11 += t.ones;
                    c.n10 += t.zeros;
                } else {
                    c.n01 += t.ones;
                    c.n00 += t.zeros;
                }
            }
        }
        const double power = qf(c);
        if (first || power > best.power) {
            first = false;
            best = {combiner, power, c.p1().value_or(0.0), c.p0().value_or(0.0)};
        }
    }
    return best;
}

SingleInfluence influence_single(std::span<const double> z, std::span<const std::uint8_t> y,
                                 const QualityFn& qf, bool is_anomaly_factor) {
    auto predictor = fit_two_sided(z, y, qf, is_anomaly_factor);
    const double influence = predictor.power;
    return {predictor, influence};
}

std::optional<TwoSidedPredictor> pair_component(const TwoSidedPredictor& single_fit,
                                                std::span<const double> z,
                                                std::span<const std::uint8_t> y,
                                                const QualityFn& qf, double prefilter_floor,
                                                bool is_anomaly_factor) {
    auto passes = [&](const TwoSidedPredictor& p) {
        return std::min(p.p1, p.p0) >= prefilter_floor;
    };
    if (passes(single_fit)) return single_fit;
    if (qf.kind() != QualityKind::FloorPower) return std::nullopt;
    auto relaxed = fit_two_sided(z, y, qf.with_floor(prefilter_floor), is_anomaly_factor);
    if (passes(relaxed)) return relaxed;
    return std::nullopt;
}

PairInfluence fuse_components(const TwoSidedPredictor& first, const TwoSidedPredictor& second,
                              std::span<const double> z1, std::span<const double> z2,
                              std::span<const std::uint8_t> y, const QualityFn& qf) {
    const auto f_bits = binarize_factor(first, z1);
    const auto g_bits = binarize_factor(second, z2);
    const auto fusion = fuse_pair(f_bits, g_bits, y, qf);
    PairInfluence out;
    out.predictor = {first, second, fusion.combiner, fusion.power, fusion.p1, fusion.p0};
    out.influence = fusion.power;
    return out;
}

std::optional<PairInfluence> influence_pair(std::span<const double> z1, std::span<const double> z2,
                                            std::span<const std::uint8_t> y, const QualityFn& qf,
                                            double prefilter_floor, bool z1_is_anomaly,
                                            bool z2_is_anomaly) {
    check_lengths(z1.size(), y.size());
    check_lengths(z2.size(), y.size());
    const auto f = pair_component(fit_two_sided(z1, y, qf, z1_is_anomaly), z1, y, qf,
                                  prefilter_floor, z1_is_anomaly);
    if (!f) return std::nullopt;
    const auto g = pair_component(fit_two_sided(z2, y, qf, z2_is_anomaly), z2, y, qf,
                                  prefilter_floor, z2_is_anomaly);
    if (!g) return std::nullopt;
    return fuse_components(*f, *g, z1, z2, y, qf);
}

void check_group_size(std::size_t size) {
    if (size == 1 || size == 2) return;
    if (size == 0) throw GroupSizeError("a factor group needs at least one factor");
    throw GroupSizeError("groups of " + std::to_string(size) +
                         " factors are not supported: with a few hundred orders per slice the "
                         "sample is too small to fit predictors of that complexity reliably");
}

}  // namespace tca
