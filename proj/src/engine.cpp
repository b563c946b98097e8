#include "tca/engine.hpp"

#include "tca/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>
#include <tuple>

namespace tca {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kFirstScore = index_of(Descriptor::VolumeScore);

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const auto workers = std::min<std::size_t>(threads, count);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

void require(bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid engine configuration: ") + what);
}

// Rows of one factor usable at this slice with their values and targets.
struct FactorSample {
    bool complete = true;
    std::vector<std::size_t> rows;  // only filled when incomplete
    std::vector<double> z;
    Bits y;
};

FactorSample sample_of(const PortfolioSlice& slice, const Bits& y, std::size_t factor) {
    FactorSample s;
    const auto column = slice.factors.column(factor);
    for (std::size_t k = 0; k < column.size(); ++k) {
        if (std::isnan(column[k])) {
            s.complete = false;
            break;
        }
    }
    if (s.complete) {
        s.z.assign(column.begin(), column.end());
        s.y = y;
        return s;
    }
    for (std::size_t k = 0; k < column.size(); ++k) {
        if (std::isnan(column[k])) continue;
        s.rows.push_back(k);
        s.z.push_back(column[k]);
        s.y.push_back(y[k]);
    }
    return s;
}

GroupEntry single_entry(std::size_t group, const TwoSidedPredictor& fit, std::size_t sample_size,
                        double r) {
    GroupEntry e;
    e.group = group;
    e.influence = fit.power;
    e.p1 = fit.p1;
    e.p0 = fit.p0;
    e.retained = std::min(fit.p1, fit.p0) >= r;
    e.sample_size = sample_size;
    e.predictor = fit;
    return e;
}

GroupEntry pair_entry(std::size_t group, const TwoSidedPredictor& first,
                      const TwoSidedPredictor& second, std::span<const double> z1,
                      std::span<const double> z2, const Bits& y, const EngineConfig& config) {
    Bits f_bits(y.size());
    Bits g_bits(y.size());
    Bits target;
    std::vector<std::size_t> keep;
    bool complete = true;
    for (std::size_t k = 0; k < y.size(); ++k) {
        if (std::isnan(z1[k]) || std::isnan(z2[k])) complete = false;
    }
    std::size_t n = 0;
    if (complete) {
        for (std::size_t k = 0; k < y.size(); ++k) {
            f_bits[k] = first.fires(z1[k]) ? 1 : 0;
            g_bits[k] = second.fires(z2[k]) ? 1 : 0;
        }
        n = y.size();
    } else {
        target.reserve(y.size());
        for (std::size_t k = 0; k < y.size(); ++k) {
            if (std::isnan(z1[k]) || std::isnan(z2[k])) continue;
            f_bits[n] = first.fires(z1[k]) ? 1 : 0;
            g_bits[n] = second.fires(z2[k]) ? 1 : 0;
            target.push_back(y[k]);
            ++n;
        }
        f_bits.resize(n);
        g_bits.resize(n);
    }

    GroupEntry e;
    e.group = group;
    e.sample_size = n;
    const auto& truth = complete ? y : target;
    if (n == 0) {
        e.predictor = PairPredictor{first, second, Combiner::And, 0.0, 0.0, 0.0};
        return e;
    }
    const auto fusion = fuse_pair(f_bits, g_bits, truth, config.quality_fn());
    e.influence = fusion.power;
    e.p1 = fusion.p1;
    e.p0 = fusion.p0;
    e.retained = std::min(fusion.p1, fusion.p0) >= config.r;
    e.predictor = PairPredictor{first, second, fusion.combiner, fusion.power, fusion.p1, fusion.p0};
    return e;
}

void add_zone(std::vector<AlarmZone>& zones, const PortfolioSlice& slice, std::size_t factor,
              const TwoSidedPredictor& p) {
    for (const auto& z : zones) {
        if (z.factor == factor && z.theta_minus == p.theta_minus && z.theta_plus == p.theta_plus) {
            return;
        }
    }
    AlarmZone zone;
    zone.slice = slice.slice;
    zone.factor = factor;
    zone.theta_minus = p.theta_minus;
    zone.theta_plus = p.theta_plus;
    const auto column = slice.factors.column(factor);
    for (std::size_t k = 0; k < column.size(); ++k) {
        if (!std::isnan(column[k]) && p.fires(column[k])) zone.triggered.push_back(slice.orders[k]);
    }
    zones.push_back(std::move(zone));
}

}  // namespace

void EngineConfig::validate() const {
    require(q > 0.0 && q < 1.0, "0 < q < 1");
    require(r >= 0.70 && r <= 1.0, "0.70 <= r <= 1.0");
    require(tau >= 0, "tau >= 0");
    require(min_orders >= 50, "min_orders >= 50");
    require(score_window >= 1, "score_window >= 1");
    require(score_min_history >= 1 && score_min_history <= score_window,
            "1 <= score_min_history <= score_window");
    require(weight_u > 0.0 && weight_u < 1.0, "0 < weight_u < 1");
    require(prefilter_ratio > 0.0 && prefilter_ratio <= 1.0, "0 < prefilter_ratio <= 1");
    require(threads >= 1, "threads >= 1");
    detectors.validate();
}

QualityFn EngineConfig::quality_fn() const {
    switch (quality) {
        case QualityKind::FloorPower: return QualityFn::floor_power(r);
        case QualityKind::MinPP: return QualityFn::min_pp();
        case QualityKind::Weighted: return QualityFn::weighted(weight_u);
    }
    return QualityFn::floor_power(r);
}

Enricher::Enricher(EngineConfig config) : config_(std::move(config)) { config_.validate(); }

Enricher::OrderState& Enricher::state_for(OrderId order) {
    auto it = orders_.find(order);
    if (it != orders_.end()) return it->second;
    OrderState state;
    state.ecdf.assign(kDescriptorCount - kFirstScore, EcdfState(config_.score_window));
    state.series.reserve(kDescriptorCount);
    for (std::size_t d = 0; d < kDescriptorCount; ++d) state.series.emplace_back(config_.detectors);
    return orders_.emplace(order, std::move(state)).first->second;
}

PortfolioSlice Enricher::push(const PortfolioSlice& raw) {
    if (raw.factors.cols() != kDescriptorCount || raw.factors.rows() != raw.orders.size()) {
        throw DomainError("enrichment expects raw slices with 7 descriptor columns");
    }
    if (last_slice_ && raw.slice <= *last_slice_) {
        throw OrderingError("slices must be pushed in increasing order");
    }
    last_slice_ = raw.slice;

    PortfolioSlice out;
    out.slice = raw.slice;
    out.orders = raw.orders;
    out.pe = raw.pe;
    out.factors = FactorMatrix(raw.orders.size(), kFactorCount);
    const int t = raw.slice;

    for (std::size_t k = 0; k < raw.orders.size(); ++k) {
        auto& state = state_for(raw.orders[k]);
        for (std::size_t d = 0; d < kDescriptorCount; ++d) {
            const double x = raw.factors(k, d);
            double value = x;
            if (d >= kFirstScore) {
                auto& ecdf = state.ecdf[d - kFirstScore];
                value = causal_score(ecdf, x, config_.score_min_history).value_or(kNaN);
                ecdf.update(x);
            }
            out.factors(k, d) = value;

            auto& series = state.series[d];
            if (!std::isnan(value)) {
                const auto emission = series.detector.push(value);
                for (std::size_t a = 0; a < kAnomalyTypeCount; ++a) {
                    const auto& fin = emission.of(static_cast<AnomalyType>(a));
                    if (fin && fin->intensity > 0.0) series.recent[a].emplace_back(t, fin->intensity);
                }
            }
            for (std::size_t a = 0; a < kAnomalyTypeCount; ++a) {
                auto& recent = series.recent[a];
                while (!recent.empty() && recent.front().first < t - config_.tau) recent.pop_front();
                double smoothed = 0.0;
                for (const auto& [s, v] : recent) smoothed = std::max(smoothed, v);
                out.factors(k, anomaly_factor(static_cast<Descriptor>(d),
                                              static_cast<AnomalyType>(a))) = smoothed;
            }
        }
    }
    return out;
}

Portfolio enrich(const Portfolio& raw, const EngineConfig& config) {
    Enricher enricher(config);
    Portfolio out;
    out.reserve(raw.size());
    for (const auto& slice : raw) out.push_back(enricher.push(slice));
    if (config.causal) return out;

    // Offline alignment: rerun the detectors on each complete series and
    // stamp intensities on the slice they describe.
    struct Location {
        std::size_t slice_pos;
        std::size_t row;
    };
    std::map<OrderId, std::vector<Location>> locations;
    for (std::size_t p = 0; p < out.size(); ++p) {
        for (std::size_t k = 0; k < out[p].orders.size(); ++k) {
            locations[out[p].orders[k]].push_back({p, k});
        }
    }
    const auto& dp = config.detectors;
    for (const auto& [order, locs] : locations) {
        for (std::size_t d = 0; d < kDescriptorCount; ++d) {
            std::vector<double> u;
            std::vector<int> stamp;
            for (const auto& loc : locs) {
                const double v = out[loc.slice_pos].factors(loc.row, d);
                if (std::isnan(v)) continue;
                u.push_back(v);
                stamp.push_back(out[loc.slice_pos].slice);
            }
            const auto base = baseline(u, dp.baseline);
            const std::array<std::vector<double>, kAnomalyTypeCount> intensity = {
                detect_peaks_crenels(u, base.level, base.sigma, dp.peak),
                detect_jumps(u, base.level, base.sigma, dp.jump),
                detect_trend_changes(u, base.level, base.sigma, dp.trend)};
            for (const auto& loc : locs) {
                auto& slice = out[loc.slice_pos];
                for (std::size_t a = 0; a < kAnomalyTypeCount; ++a) {
                    double smoothed = 0.0;
                    for (std::size_t i = 0; i < u.size(); ++i) {
                        if (stamp[i] <= slice.slice && stamp[i] >= slice.slice - config.tau) {
                            smoothed = std::max(smoothed, intensity[a][i]);
                        }
                    }
                    slice.factors(loc.row, anomaly_factor(static_cast<Descriptor>(d),
                                                          static_cast<AnomalyType>(a))) = smoothed;
                }
            }
        }
    }
    return out;
}

GroupEntry estimate_group(const PortfolioSlice& slice, const BinarizedSlice& target,
                          std::span<const std::size_t> factors, const EngineConfig& config) {
    check_group_size(factors.size());
    if (slice.factors.cols() != kFactorCount) throw DomainError("slice is not enriched");
    const auto& info = factor_set();
    const auto qf = config.quality_fn();
    for (const auto f : factors) {
        if (f >= kFactorCount) throw DomainError("factor id out of range");
    }

    auto group_index = [&]() -> std::size_t {
        const auto& groups = all_groups();
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const auto& grp = groups[g];
            if (grp.size != factors.size()) continue;
            if (grp.size == 1 && grp.factors[0] == factors[0]) return g;
            if (grp.size == 2 && ((grp.factors[0] == factors[0] && grp.factors[1] == factors[1]) ||
                                  (grp.factors[0] == factors[1] && grp.factors[1] == factors[0]))) {
                return g;
            }
        }
        throw DomainError("a pair needs two distinct factors");
    }();

    if (factors.size() == 1) {
        const auto s = sample_of(slice, target.y, factors[0]);
        const auto fit = fit_two_sided(s.z, s.y, qf, info[factors[0]].is_anomaly());
        return single_entry(group_index, fit, s.z.size(), config.r);
    }

    std::array<std::optional<TwoSidedPredictor>, 2> comps;
    for (std::size_t i = 0; i < 2; ++i) {
        const auto s = sample_of(slice, target.y, factors[i]);
        const bool anomaly = info[factors[i]].is_anomaly();
        comps[i] = pair_component(fit_two_sided(s.z, s.y, qf, anomaly), s.z, s.y, qf,
                                  config.prefilter_floor(), anomaly);
    }
    if (!comps[0] || !comps[1]) {
        GroupEntry e;
        e.group = group_index;
        e.admitted = false;
        return e;
    }
    return pair_entry(group_index, *comps[0], *comps[1], slice.factors.column(factors[0]),
                      slice.factors.column(factors[1]), target.y, config);
}

InfluenceReport analyze_slice(const PortfolioSlice& slice, const EngineConfig& config) {
    config.validate();
    if (slice.factors.cols() != kFactorCount) throw DomainError("slice is not enriched");

    InfluenceReport report;
    report.slice = slice.slice;
    report.active_orders = slice.active_count();
    if (slice.active_count() < config.min_orders) {
        report.skipped = "active orders " + std::to_string(slice.active_count()) +
                         " below min_orders " + std::to_string(config.min_orders);
        return report;
    }
    const auto target = binarize(slice.pe, config.q);
    report.threshold = target.threshold;
    report.bad_orders = target.ones();
    if (target.degenerate) {
        report.skipped = "degenerate binarization: no performance below the quantile threshold";
        return report;
    }

    const auto& info = factor_set();
    const auto& groups = all_groups();
    const auto qf = config.quality_fn();
    report.entries.resize(kGroupCount);

    std::vector<std::optional<TwoSidedPredictor>> components(kFactorCount);
    parallel_for(kFactorCount, config.threads, [&](std::size_t j) {
        const auto s = sample_of(slice, target.y, j);
        const bool anomaly = info[j].is_anomaly();
        const auto fit = fit_two_sided(s.z, s.y, qf, anomaly);
        report.entries[j] = single_entry(j, fit, s.z.size(), config.r);
        if (config.pairs_enabled) {
            components[j] =
                pair_component(fit, s.z, s.y, qf, config.prefilter_floor(), anomaly);
        }
    });

    std::atomic<std::size_t> evaluations{0};
    parallel_for(kPairCount, config.threads, [&](std::size_t p) {
        const std::size_t g = kFactorCount + p;
        const auto& grp = groups[g];
        const auto& a = components[grp.factors[0]];
        const auto& b = components[grp.factors[1]];
        if (!config.pairs_enabled || !a || !b) {
            GroupEntry e;
            e.group = g;
            e.admitted = false;
            report.entries[g] = e;
            return;
        }
        ++evaluations;
        report.entries[g] = pair_entry(g, *a, *b, slice.factors.column(grp.factors[0]),
                                       slice.factors.column(grp.factors[1]), target.y, config);
    });
    report.pair_evaluations = evaluations.load();

    for (std::size_t g = 0; g < kGroupCount; ++g) {
        if (report.entries[g].retained) report.retained.push_back(g);
    }
    if (!report.retained.empty()) {
        double best_p0 = -1.0;
        for (const auto g : report.retained) {
            const auto& e = report.entries[g];
            if (e.influence > report.max_influence ||
                (e.influence == report.max_influence && e.p0 > best_p0)) {
                if (e.influence > report.max_influence) best_p0 = -1.0;
                report.max_influence = e.influence;
                best_p0 = std::max(best_p0, e.p0);
            }
        }
        for (const auto g : report.retained) {
            const auto& e = report.entries[g];
            if (e.influence == report.max_influence && e.p0 == best_p0) report.dominating.push_back(g);
        }
    }

    for (const auto g : report.retained) {
        const auto& e = report.entries[g];
        const auto& grp = groups[g];
        if (const auto* single = std::get_if<TwoSidedPredictor>(&e.predictor)) {
            add_zone(report.alarm_zones, slice, grp.factors[0], *single);
        } else if (const auto* pair = std::get_if<PairPredictor>(&e.predictor)) {
            add_zone(report.alarm_zones, slice, grp.factors[0], pair->first);
            add_zone(report.alarm_zones, slice, grp.factors[1], pair->second);
        }
    }
    std::sort(report.alarm_zones.begin(), report.alarm_zones.end(),
              [](const AlarmZone& a, const AlarmZone& b) {
                  return std::tie(a.factor, a.theta_minus, a.theta_plus) <
                         std::tie(b.factor, b.theta_minus, b.theta_plus);
              });
    return report;
}

std::vector<InfluenceReport> analyze_portfolio(const Portfolio& raw, const EngineConfig& config) {
    config.validate();
    std::vector<InfluenceReport> reports;
    reports.reserve(raw.size());
    if (config.causal) {
        Enricher enricher(config);
        for (const auto& slice : raw) reports.push_back(analyze_slice(enricher.push(slice), config));
        return reports;
    }
    for (const auto& slice : enrich(raw, config)) reports.push_back(analyze_slice(slice, config));
    return reports;
}

}  // namespace tca
