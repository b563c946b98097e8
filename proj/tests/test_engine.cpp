#include "tca/engine.hpp"
#include "tca/error.hpp"
#include "tca/factors.hpp"
#include "tca/report_io.hpp"
#include "tca/synthetic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

namespace {

using tca::EngineConfig;
using tca::Portfolio;
using tca::PortfolioSlice;

// value(order index, slice, descriptor index)
using Shape = std::function<double(std::size_t, int, std::size_t)>;

Portfolio make_portfolio(std::size_t orders, int slices, const Shape& value,
                         const std::function<double(std::size_t, int)>& pe) {
    Portfolio out;
    for (int t = 0; t < slices; ++t) {
        PortfolioSlice s;
        s.slice = t;
        s.factors = tca::FactorMatrix(orders, tca::kDescriptorCount);
        for (std::size_t o = 0; o < orders; ++o) {
            s.orders.push_back(tca::OrderId{static_cast<int>(o) + 1});
            for (std::size_t d = 0; d < tca::kDescriptorCount; ++d) s.factors(o, d) = value(o, t, d);
            s.pe.push_back(pe(o, t));
        }
        out.push_back(std::move(s));
    }
    return out;
}

double constant_value(std::size_t o, int, std::size_t d) { return static_cast<double>(o + d); }

tca::SyntheticSpec small_spec() {
    tca::SyntheticSpec spec;
    spec.seed = 11;
    spec.orders = 200;
    spec.slices = 50;
    spec.dependences.push_back({tca::descriptor_factor(tca::Descriptor::VolatilityScore), 40, 41, 0.95});
    return spec;
}

TEST(Enrich, SevenDescriptorsBecomeTwentyEightFactors) {
    const auto raw = make_portfolio(3, 40, constant_value, [](std::size_t, int) { return 0.0; });
    EngineConfig c;
    const auto rich = tca::enrich(raw, c);
    ASSERT_EQ(rich.size(), raw.size());
    for (std::size_t t = 0; t < rich.size(); ++t) {
        ASSERT_EQ(rich[t].factors.cols(), tca::kFactorCount);
        for (std::size_t o = 0; o < 3; ++o) {
            for (std::size_t d = 0; d < 4; ++d) EXPECT_EQ(rich[t].factors(o, d), raw[t].factors(o, d));
            for (std::size_t d = 4; d < 7; ++d) {
                const double v = rich[t].factors(o, d);
                if (t < c.score_min_history) {
                    EXPECT_TRUE(std::isnan(v)) << t;
                } else {
                    EXPECT_TRUE(v > 0.0 && v <= 1.0) << t;
                }
            }
        }
    }
}

TEST(Enrich, ConstantDescriptorsHaveNoAnomalies) {
    const auto raw = make_portfolio(4, 60, constant_value, [](std::size_t, int) { return 0.0; });
    for (bool causal : {true, false}) {
        EngineConfig c;
        c.causal = causal;
        for (const auto& s : tca::enrich(raw, c)) {
            for (std::size_t f = tca::kDescriptorCount; f < tca::kFactorCount; ++f) {
                for (std::size_t o = 0; o < 4; ++o) ASSERT_EQ(s.factors(o, f), 0.0);
            }
        }
    }
}

TEST(Enrich, JumpIsSmoothedOverTauSlices) {
    const auto shape = [](std::size_t, int t, std::size_t d) { return d == 0 && t >= 20 ? 10.0 : 1.0; };
    const auto raw = make_portfolio(1, 45, shape, [](std::size_t, int) { return 0.0; });
    const auto jump = tca::anomaly_factor(tca::Descriptor::Volatility, tca::AnomalyType::Jump);
    EngineConfig c;
    c.tau = 3;

    c.causal = false;
    const auto offline = tca::enrich(raw, c);
    for (int t = 0; t < 45; ++t) {
        const bool inside = t >= 20 && t <= 23;
        EXPECT_EQ(offline[static_cast<std::size_t>(t)].factors(0, jump) > 0.0, inside) << t;
    }

    c.causal = true;
    const auto online = tca::enrich(raw, c);
    const int delay = c.detectors.confirmation_delay(tca::AnomalyType::Jump);
    for (int t = 0; t < 45; ++t) {
        const bool inside = t >= 20 + delay && t <= 23 + delay;
        EXPECT_EQ(online[static_cast<std::size_t>(t)].factors(0, jump) > 0.0, inside) << t;
    }
}

TEST(Enrich, CausalPrefixIsStable) {
    auto spec = small_spec();
    spec.orders = 20;
    const auto raw = tca::generate_synthetic(spec).portfolio;
    EngineConfig c;
    const auto full = tca::enrich(raw, c);
    const Portfolio prefix(raw.begin(), raw.begin() + 30);
    const auto part = tca::enrich(prefix, c);
    for (std::size_t t = 0; t < part.size(); ++t) {
        const auto& a = part[t].factors;
        const auto& b = full[t].factors;
        for (std::size_t o = 0; o < a.rows(); ++o) {
            for (std::size_t f = 0; f < a.cols(); ++f) {
                const bool same = (std::isnan(a(o, f)) && std::isnan(b(o, f))) || a(o, f) == b(o, f);
                ASSERT_TRUE(same) << t << " " << o << " " << f;
            }
        }
    }
}

TEST(Enrich, SlicesMustIncrease) {
    const auto raw = make_portfolio(2, 3, constant_value, [](std::size_t, int) { return 0.0; });
    tca::Enricher e(EngineConfig{});
    e.push(raw[1]);
    EXPECT_THROW(e.push(raw[0]), tca::OrderingError);
}

TEST(Analyze, TooFewOrdersIsSkipped) {
    const auto raw = make_portfolio(60, 1, constant_value, [](std::size_t o, int) { return double(o); });
    EngineConfig c;
    const auto reports = tca::analyze_portfolio(raw, c);
    ASSERT_EQ(reports.size(), 1U);
    ASSERT_TRUE(reports[0].skipped.has_value());
    EXPECT_NE(reports[0].skipped->find("60"), std::string::npos);
    EXPECT_TRUE(reports[0].entries.empty());
}

TEST(Analyze, EqualPerformanceIsDegenerate) {
    const auto raw = make_portfolio(120, 1, constant_value, [](std::size_t, int) { return 1.0; });
    const auto reports = tca::analyze_portfolio(raw, EngineConfig{});
    ASSERT_TRUE(reports[0].skipped.has_value());
    EXPECT_NE(reports[0].skipped->find("degenerate"), std::string::npos);
}

TEST(Analyze, NoInformativeFactorGivesEmptyRetainedSet) {
    // Bad orders are spread evenly over every factor's range.
    const auto shape = [](std::size_t o, int, std::size_t d) { return static_cast<double>((o * (d + 3)) % 17); };
    const auto raw = make_portfolio(200, 1, shape, [](std::size_t o, int) { return o % 40 == 0 ? -1.0 : 1.0; });
    EngineConfig c;
    c.q = 0.05;
    const auto reports = tca::analyze_portfolio(raw, c);
    ASSERT_FALSE(reports[0].skipped.has_value());
    EXPECT_TRUE(reports[0].retained.empty());
    EXPECT_TRUE(reports[0].dominating.empty());
    EXPECT_EQ(reports[0].max_influence, 0.0);
}

class AnalyzeSynthetic : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        generated_ = new tca::SyntheticPortfolio(tca::generate_synthetic(small_spec()));
        config_.q = 0.03;
        reports_ = new std::vector<tca::InfluenceReport>(tca::analyze_portfolio(generated_->portfolio, config_));
    }
    static void TearDownTestSuite() {
        delete reports_;
        delete generated_;
    }
    static inline tca::SyntheticPortfolio* generated_ = nullptr;
    static inline std::vector<tca::InfluenceReport>* reports_ = nullptr;
    static inline EngineConfig config_;
};

TEST_F(AnalyzeSynthetic, RetainedSetInvariants) {
    std::size_t retained_total = 0;
    for (const auto& r : *reports_) {
        if (r.skipped) continue;
        ASSERT_EQ(r.entries.size(), tca::kGroupCount);
        double best = 0.0;
        for (std::size_t i = 0; i < r.entries.size(); ++i) {
            const auto& e = r.entries[i];
            const bool meets = e.admitted && std::min(e.p1, e.p0) >= config_.r;
            EXPECT_EQ(e.retained, meets) << r.slice << " " << i;
            if (e.retained) {
                EXPECT_LE(e.false_alarm_rate(), 1.0 - config_.r + 1e-12);
                best = std::max(best, e.influence);
            }
        }
        retained_total += r.retained.size();
        EXPECT_DOUBLE_EQ(r.max_influence, best);
        for (std::size_t i : r.dominating) {
            EXPECT_TRUE(r.entries[i].retained);
            EXPECT_EQ(r.entries[i].influence, r.max_influence);
        }
        for (const auto& zone : r.alarm_zones) EXPECT_EQ(zone.slice, r.slice);
    }
    EXPECT_GT(retained_total, 0U);
}

TEST_F(AnalyzeSynthetic, PlantedDependenceDominates) {
    const auto planted = small_spec().dependences[0].factor;
    for (int t : {40, 41}) {
        const auto& r = (*reports_)[static_cast<std::size_t>(t)];
        ASSERT_FALSE(r.skipped.has_value());
        bool found = false;
        for (std::size_t i : r.dominating) {
            found = found || tca::all_groups()[r.entries[i].group].contains(planted);
        }
        EXPECT_TRUE(found) << t;
    }
}

TEST_F(AnalyzeSynthetic, ThreadsDoNotChangeResults) {
    auto c = config_;
    c.threads = 4;
    const auto parallel = tca::analyze_portfolio(generated_->portfolio, c);
    ASSERT_EQ(parallel.size(), reports_->size());
    for (std::size_t t = 0; t < parallel.size(); ++t) {
        EXPECT_EQ(tca::report_to_json(parallel[t], c), tca::report_to_json((*reports_)[t], c)) << t;
    }
}

TEST_F(AnalyzeSynthetic, PairsCanBeSwitchedOff) {
    auto c = config_;
    c.pairs_enabled = false;
    const auto raw = Portfolio(generated_->portfolio.begin() + 40, generated_->portfolio.begin() + 41);
    const auto reports = tca::analyze_portfolio(raw, c);
    for (const auto& r : reports) {
        EXPECT_EQ(r.pair_evaluations, 0U);
    }
}

TEST(EstimateGroup, RejectsTriples) {
    const auto raw = make_portfolio(120, 1, constant_value, [](std::size_t o, int) { return double(o); });
    const auto rich = tca::enrich(raw, EngineConfig{});
    const auto y = tca::binarize(rich[0].pe, 0.05);
    const std::vector<std::size_t> triple = {0, 1, 2};
    EXPECT_THROW(tca::estimate_group(rich[0], y, triple, EngineConfig{}), tca::GroupSizeError);
}

TEST(Config, ValidationErrors) {
    const auto bad = [](auto mutate) {
        EngineConfig c;
        mutate(c);
        EXPECT_THROW(c.validate(), tca::ConfigError);
    };
    EXPECT_NO_THROW(EngineConfig{}.validate());
    bad([](EngineConfig& c) { c.q = 0.0; });
    bad([](EngineConfig& c) { c.q = 1.0; });
    bad([](EngineConfig& c) { c.r = 0.5; });
    bad([](EngineConfig& c) { c.r = 1.01; });
    bad([](EngineConfig& c) { c.tau = -1; });
    bad([](EngineConfig& c) { c.min_orders = 10; });
    bad([](EngineConfig& c) { c.score_window = 0; });
    bad([](EngineConfig& c) { c.score_min_history = c.score_window + 1; });
    bad([](EngineConfig& c) { c.threads = 0; });
}

TEST(Analyze, EmptyPortfolio) {
    EXPECT_TRUE(tca::analyze_portfolio({}, EngineConfig{}).empty());
    EXPECT_TRUE(tca::enrich({}, EngineConfig{}).empty());
}

}  // namespace
