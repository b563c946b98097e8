#include "tca/synthetic.hpp"

#include "tca/engine.hpp"
#include "tca/error.hpp"
#include "tca/factors.hpp"
#include "tca/keyvalue.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <set>

namespace tca {

namespace {

// Typical magnitudes of the raw series; scale only matters for readability.
constexpr std::array<double, kDescriptorCount> kBaseLevel = {20.0, 5.0, 0.0, 0.0, 100.0, 20.0, 5.0};
constexpr double kLevelSpread = 3.0;
constexpr double kDegradedJitter = 0.5;

void spec_check(bool ok, const std::string& what) {
    if (!ok) throw SpecError("synthetic spec: " + what);
}

std::string plant_text(const AnomalyPlant& a) {
    return "anomaly " + std::to_string(a.order.value) + " " +
           std::string(descriptor_name(a.descriptor)) + " " +
           std::string(anomaly_type_name(a.type)) + " " + std::to_string(a.slice) + " " +
           format_double(a.magnitude);
}

std::string plant_text(const DependencePlant& d) {
    return "dependence " + factor_set()[d.factor].name + " " + std::to_string(d.first) + " " +
           std::to_string(d.last) + " " + format_double(d.level);
}

AnomalyPlant parse_anomaly(const ConfigLine& line) {
    if (line.words.size() != 6) {
        throw ParseError(line.line, "expected 'anomaly <order> <descriptor> <type> <slice> <magnitude>'");
    }
    AnomalyPlant a;
    a.order = OrderId{static_cast<int>(word_to_integer(line.words[1], line.line))};
    const auto d = parse_descriptor(line.words[2]);
    if (!d) throw ParseError(line.line, "unknown descriptor '" + line.words[2] + "'");
    a.descriptor = *d;
    const auto type = parse_anomaly_type(line.words[3]);
    if (!type) throw ParseError(line.line, "unknown anomaly type '" + line.words[3] + "'");
    a.type = *type;
    a.slice = static_cast<int>(word_to_integer(line.words[4], line.line));
    a.magnitude = word_to_real(line.words[5], line.line);
    return a;
}

DependencePlant parse_dependence(const ConfigLine& line) {
    if (line.words.size() != 5) {
        throw ParseError(line.line, "expected 'dependence <factor> <first> <last> <level>'");
    }
    DependencePlant d;
    const auto factor = find_factor(line.words[1]);
    if (!factor) throw ParseError(line.line, "unknown factor '" + line.words[1] + "'");
    d.factor = *factor;
    d.first = static_cast<int>(word_to_integer(line.words[2], line.line));
    d.last = static_cast<int>(word_to_integer(line.words[3], line.line));
    d.level = word_to_real(line.words[4], line.line);
    return d;
}

double shape(const AnomalyPlant& a, int u) {
    if (u < a.slice) return 0.0;
    switch (a.type) {
        case AnomalyType::Peak: return u == a.slice ? a.magnitude : 0.0;
        case AnomalyType::Jump: return a.magnitude;
        case AnomalyType::Trend: return a.magnitude * (u - a.slice);
    }
    return 0.0;
}

}  // namespace

void SyntheticSpec::validate() const {
    spec_check(orders >= 1, "orders must be positive");
    spec_check(slices >= 1, "slices must be positive");
    spec_check(std::abs(ar_coefficient) < 1.0, "|ar_coefficient| < 1");
    spec_check(noise_sd > 0.0 && std::isfinite(noise_sd), "noise_sd must be positive");
    spec_check(late_start >= 0.0 && late_start <= 1.0, "late_start in [0, 1]");
    spec_check(early_end >= 0.0 && early_end <= 1.0, "early_end in [0, 1]");
    spec_check(std::isfinite(degraded_pe), "degraded_pe must be finite");
    spec_check(score_window >= 1, "score_window must be positive");
    spec_check(score_min_history >= 1 && score_min_history <= score_window,
               "score_min_history in [1, score_window]");
    spec_check(tau >= 0, "tau must be non-negative");
    const int max_order = static_cast<int>(orders);
    for (const auto& a : anomalies) {
        spec_check(a.order.value >= 1 && a.order.value <= max_order,
                   "anomaly plant order " + std::to_string(a.order.value) + " out of range");
        spec_check(a.slice >= 0 && a.slice < slices,
                   "anomaly plant slice " + std::to_string(a.slice) + " out of range");
        spec_check(std::isfinite(a.magnitude), "anomaly magnitude must be finite");
    }
    for (const auto& d : dependences) {
        spec_check(d.factor < kFactorCount, "dependence factor out of range");
        spec_check(d.first >= 0 && d.last < slices && d.first <= d.last,
                   "dependence slice range " + std::to_string(d.first) + ".." +
                       std::to_string(d.last) + " out of range");
        spec_check(std::isfinite(d.level), "dependence level must be finite");
    }
    try {
        detectors.validate();
    } catch (const ConfigError& e) {
        throw SpecError(std::string("synthetic spec: ") + e.what());
    }
}

SyntheticSpec parse_synthetic_spec(std::istream& in) {
    SyntheticSpec spec;
    for (const auto& line : read_config_lines(in)) {
        if (!line.is_assignment) {
            const auto& kind = line.words.front();
            if (kind == "anomaly") spec.anomalies.push_back(parse_anomaly(line));
            else if (kind == "dependence") spec.dependences.push_back(parse_dependence(line));
            else throw ParseError(line.line, "unknown plant kind '" + kind + "'");
            continue;
        }
        const auto& k = line.key;
        auto as_count = [&] {
            const auto v = config_to_integer(line);
            if (v < 0) throw ParseError(line.line, "'" + k + "' must be non-negative");
            return static_cast<std::size_t>(v);
        };
        if (k == "seed") spec.seed = static_cast<std::uint64_t>(as_count());
        else if (k == "orders") spec.orders = as_count();
        else if (k == "slices") spec.slices = static_cast<int>(config_to_integer(line));
        else if (k == "ar_coefficient") spec.ar_coefficient = config_to_real(line);
        else if (k == "noise_sd") spec.noise_sd = config_to_real(line);
        else if (k == "late_start") spec.late_start = config_to_real(line);
        else if (k == "early_end") spec.early_end = config_to_real(line);
        else if (k == "degraded_pe") spec.degraded_pe = config_to_real(line);
        else if (k == "score_window") spec.score_window = as_count();
        else if (k == "score_min_history") spec.score_min_history = as_count();
        else if (k == "tau") spec.tau = static_cast<int>(config_to_integer(line));
        else if (!set_detector_param(spec.detectors, line)) {
            throw ParseError(line.line, "unknown key '" + k + "'");
        }
    }
    spec.validate();
    return spec;
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open synthetic spec '" + path + "'");
    return parse_synthetic_spec(in);
}

SyntheticPortfolio generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const std::size_t n_orders = spec.orders;
    const int n_slices = spec.slices;
    const auto T = static_cast<std::size_t>(n_slices);

    std::set<int> planted;
    for (const auto& a : spec.anomalies) planted.insert(a.order.value);

    std::vector<int> start(n_orders, 0);
    std::vector<int> stop(n_orders, n_slices - 1);
    const int half = n_slices / 2;
    for (std::size_t o = 0; o < n_orders; ++o) {
        const double u_start = unit(rng);
        const double u_stop = unit(rng);
        const double p_start = unit(rng);
        const double p_stop = unit(rng);
        if (planted.count(static_cast<int>(o) + 1) != 0 || n_slices < 4) continue;
        if (u_start < spec.late_start) start[o] = 1 + static_cast<int>(p_start * (half - 1));
        if (u_stop < spec.early_end) stop[o] = half + static_cast<int>(p_stop * (n_slices - 1 - half));
    }

    // values[(o * 7 + d) * T + t]
    std::vector<double> values(n_orders * kDescriptorCount * T);
    const double phi = spec.ar_coefficient;
    const double innovation = std::sqrt(1.0 - phi * phi);
    for (std::size_t o = 0; o < n_orders; ++o) {
        for (std::size_t d = 0; d < kDescriptorCount; ++d) {
            const double level = kBaseLevel[d] + kLevelSpread * spec.noise_sd * normal(rng);
            double e = normal(rng);
            double* row = &values[(o * kDescriptorCount + d) * T];
            for (std::size_t t = 0; t < T; ++t) {
                if (t > 0) e = phi * e + innovation * normal(rng);
                row[t] = level + spec.noise_sd * e;
            }
        }
    }
    for (const auto& a : spec.anomalies) {
        const auto o = static_cast<std::size_t>(a.order.value - 1);
        double* row = &values[(o * kDescriptorCount + index_of(a.descriptor)) * T];
        for (int t = 0; t < n_slices; ++t) row[t] += spec.noise_sd * shape(a, t);
    }

    SyntheticPortfolio out;
    out.portfolio.reserve(T);
    for (int t = 0; t < n_slices; ++t) {
        PortfolioSlice slice;
        slice.slice = t;
        for (std::size_t o = 0; o < n_orders; ++o) {
            const double pe = normal(rng);
            if (t < start[o] || t > stop[o]) continue;
            slice.orders.push_back(OrderId{static_cast<int>(o) + 1});
            slice.pe.push_back(pe);
        }
        slice.factors = FactorMatrix(slice.orders.size(), kDescriptorCount);
        for (std::size_t k = 0; k < slice.orders.size(); ++k) {
            const auto o = static_cast<std::size_t>(slice.orders[k].value - 1);
            for (std::size_t d = 0; d < kDescriptorCount; ++d) {
                slice.factors(k, d) = values[(o * kDescriptorCount + d) * T + static_cast<std::size_t>(t)];
            }
        }
        out.portfolio.push_back(std::move(slice));
    }

    out.truth.seed = spec.seed;
    out.truth.anomalies = spec.anomalies;
    out.truth.dependences = spec.dependences;
    if (spec.dependences.empty()) return out;

    EngineConfig config;
    config.score_window = spec.score_window;
    config.score_min_history = spec.score_min_history;
    config.detectors = spec.detectors;
    config.tau = spec.tau;
    Enricher enricher(config);
    for (auto& slice : out.portfolio) {
        const auto enriched = enricher.push(slice);
        for (std::size_t p = 0; p < spec.dependences.size(); ++p) {
            const auto& dep = spec.dependences[p];
            if (slice.slice < dep.first || slice.slice > dep.last) continue;
            const auto column = enriched.factors.column(dep.factor);
            for (std::size_t k = 0; k < column.size(); ++k) {
                if (std::isnan(column[k]) || !(column[k] > dep.level)) continue;
                slice.pe[k] = spec.degraded_pe - kDegradedJitter * std::abs(normal(rng));
                out.truth.degraded.push_back({p, slice.slice, slice.orders[k]});
            }
        }
    }
    return out;
}

void write_ground_truth(std::ostream& out, const GroundTruth& truth) {
    out << "seed = " << truth.seed << '\n';
    for (const auto& a : truth.anomalies) out << plant_text(a) << '\n';
    for (const auto& d : truth.dependences) out << plant_text(d) << '\n';
    for (const auto& g : truth.degraded) {
        out << "degraded " << g.plant << ' ' << g.slice << ' ' << g.order.value << '\n';
    }
}

GroundTruth read_ground_truth(std::istream& in) {
    GroundTruth truth;
    for (const auto& line : read_config_lines(in)) {
        if (line.is_assignment) {
            if (line.key != "seed") throw ParseError(line.line, "unknown key '" + line.key + "'");
            truth.seed = static_cast<std::uint64_t>(config_to_integer(line));
            continue;
        }
        const auto& kind = line.words.front();
        if (kind == "anomaly") {
            truth.anomalies.push_back(parse_anomaly(line));
        } else if (kind == "dependence") {
            truth.dependences.push_back(parse_dependence(line));
        } else if (kind == "degraded") {
            if (line.words.size() != 4) {
                throw ParseError(line.line, "expected 'degraded <plant> <slice> <order>'");
            }
            const auto plant = word_to_integer(line.words[1], line.line);
            if (plant < 0 || static_cast<std::size_t>(plant) >= truth.dependences.size()) {
                throw ParseError(line.line, "degraded entry refers to an unknown plant");
            }
            truth.degraded.push_back({static_cast<std::size_t>(plant),
                                      static_cast<int>(word_to_integer(line.words[2], line.line)),
                                      OrderId{static_cast<int>(word_to_integer(line.words[3], line.line))}});
        } else {
            throw ParseError(line.line, "unknown ground truth entry '" + kind + "'");
        }
    }
    return truth;
}

GroundTruth load_ground_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open ground truth '" + path + "'");
    return read_ground_truth(in);
}

}  // namespace tca
