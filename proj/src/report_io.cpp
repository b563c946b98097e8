#include "tca/report_io.hpp"

#include "tca/error.hpp"
#include "tca/factors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <regex>
#include <sstream>

namespace tca {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

ordered_json threshold_json(double v) {
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    return v;
}

std::string threshold_text(double v) {
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    return format_double(v);
}

ordered_json predictor_json(const TwoSidedPredictor& p) {
    return {{"theta_minus", threshold_json(p.theta_minus)},
            {"theta_plus", threshold_json(p.theta_plus)}};
}

ordered_json entry_json(const GroupEntry& e) {
    const auto& grp = all_groups()[e.group];
    const auto& info = factor_set();
    ordered_json j;
    j["group"] = group_name(grp);
    auto factors = ordered_json::array();
    for (std::size_t i = 0; i < grp.size; ++i) factors.push_back(info[grp.factors[i]].name);
    j["factors"] = factors;
    j["admitted"] = e.admitted;
    j["influence"] = e.influence;
    j["p1"] = e.p1;
    j["p0"] = e.p0;
    j["far"] = e.false_alarm_rate();
    j["retained"] = e.retained;
    j["sample_size"] = e.sample_size;
    if (const auto* s = std::get_if<TwoSidedPredictor>(&e.predictor)) {
        j["predictor"] = predictor_json(*s);
    } else if (const auto* p = std::get_if<PairPredictor>(&e.predictor)) {
        j["predictor"] = {{"combiner", std::string(combiner_name(p->combiner))},
                          {"first", predictor_json(p->first)},
                          {"second", predictor_json(p->second)}};
    }
    return j;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::size_t factor_by_name(const std::string& name) {
    const auto id = find_factor(name);
    if (!id) throw ParseError(0, "unknown factor '" + name + "' in report");
    return *id;
}

}  // namespace

std::string report_to_json(const InfluenceReport& report, const EngineConfig& config) {
    ordered_json j;
    j["slice"] = report.slice;
    j["active_orders"] = report.active_orders;
    j["status"] = report.skipped ? "skipped" : "analyzed";
    if (report.skipped) j["reason"] = *report.skipped;
    j["q"] = config.q;
    j["r"] = config.r;
    j["quality"] = std::string(quality_kind_name(config.quality));
    j["tau"] = config.tau;
    if (!report.skipped || report.bad_orders > 0 || report.threshold != 0.0) {
        j["threshold"] = report.threshold;
        j["bad_orders"] = report.bad_orders;
    }
    if (!report.skipped) {
        j["pair_evaluations"] = report.pair_evaluations;
        j["max_influence"] = report.max_influence;
        auto names = [&](const std::vector<std::size_t>& ids) {
            auto a = ordered_json::array();
            for (const auto g : ids) a.push_back(group_name(all_groups()[report.entries[g].group]));
            return a;
        };
        j["dominating"] = names(report.dominating);
        j["retained"] = names(report.retained);
        auto zones = ordered_json::array();
        for (const auto& z : report.alarm_zones) {
            auto orders = ordered_json::array();
            for (const auto o : z.triggered) orders.push_back(o.value);
            zones.push_back({{"factor", factor_set()[z.factor].name},
                             {"theta_minus", threshold_json(z.theta_minus)},
                             {"theta_plus", threshold_json(z.theta_plus)},
                             {"triggered", orders}});
        }
        j["alarm_zones"] = zones;
        auto groups = ordered_json::array();
        for (const auto& e : report.entries) groups.push_back(entry_json(e));
        j["groups"] = groups;
    }
    return j.dump(1) + "\n";
}

void write_heatmap(std::ostream& out, const std::vector<InfluenceReport>& reports) {
    out << "group";
    for (const auto& r : reports) out << ',' << r.slice;
    out << '\n';
    const auto& groups = all_groups();
    for (std::size_t g = 0; g < groups.size(); ++g) {
        out << group_name(groups[g]);
        for (const auto& r : reports) {
            out << ',';
            if (!r.skipped) out << format_double(r.entries[g].influence);
        }
        out << '\n';
    }
}

void write_alarm_zones(std::ostream& out, const std::vector<InfluenceReport>& reports) {
    out << "slice,factor,theta_minus,theta_plus,triggered\n";
    for (const auto& r : reports) {
        for (const auto& z : r.alarm_zones) {
            out << z.slice << ',' << factor_set()[z.factor].name << ','
                << threshold_text(z.theta_minus) << ',' << threshold_text(z.theta_plus) << ',';
            for (std::size_t i = 0; i < z.triggered.size(); ++i) {
                if (i) out << ' ';
                out << z.triggered[i].value;
            }
            out << '\n';
        }
    }
}

RunSummary run_analysis(const Portfolio& raw, const EngineConfig& config, const std::string& out_dir) {
    config.validate();
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + out_dir + "': " + ec.message());

    RunSummary summary;
    std::vector<InfluenceReport> reports;
    reports.reserve(raw.size());
    auto emit = [&](InfluenceReport report) {
        write_file(dir / ("report_" + std::to_string(report.slice) + ".json"),
                   report_to_json(report, config));
        ++summary.slices;
        ++(report.skipped ? summary.skipped : summary.analyzed);
        // Per-group detail is no longer needed once the report is written.
        if (report.skipped) report.entries.clear();
        for (auto& e : report.entries) e.predictor = std::monostate{};
        reports.push_back(std::move(report));
    };
    if (config.causal) {
        Enricher enricher(config);
        for (const auto& slice : raw) emit(analyze_slice(enricher.push(slice), config));
    } else {
        for (const auto& slice : enrich(raw, config)) emit(analyze_slice(slice, config));
    }

    std::ostringstream heat;
    write_heatmap(heat, reports);
    write_file(dir / "influence_heatmap.csv", heat.str());
    std::ostringstream zones;
    write_alarm_zones(zones, reports);
    write_file(dir / "alarm_zones.csv", zones.str());
    return summary;
}

ReportDigest digest_of(const InfluenceReport& report) {
    ReportDigest d;
    d.slice = report.slice;
    d.analyzed = !report.skipped;
    const auto& groups = all_groups();
    for (const auto g : report.dominating) {
        const auto& grp = groups[report.entries[g].group];
        d.dominating.emplace_back(grp.factors.begin(), grp.factors.begin() + grp.size);
    }
    for (const auto g : report.retained) d.retained_far.push_back(report.entries[g].false_alarm_rate());
    return d;
}

ReportDigest digest_from_json(const std::string& text) {
    ReportDigest d;
    try {
        const auto j = nlohmann::json::parse(text);
        d.slice = j.at("slice").get<int>();
        d.analyzed = j.at("status").get<std::string>() == "analyzed";
        if (!d.analyzed) return d;
        std::map<std::string, const nlohmann::json*> by_name;
        for (const auto& g : j.at("groups")) by_name[g.at("group").get<std::string>()] = &g;
        for (const auto& name : j.at("dominating")) {
            const auto it = by_name.find(name.get<std::string>());
            if (it == by_name.end()) throw ParseError(0, "dominating group missing from groups");
            std::vector<std::size_t> ids;
            for (const auto& f : it->second->at("factors")) ids.push_back(factor_by_name(f.get<std::string>()));
            d.dominating.push_back(std::move(ids));
        }
        for (const auto& name : j.at("retained")) {
            const auto it = by_name.find(name.get<std::string>());
            if (it == by_name.end()) throw ParseError(0, "retained group missing from groups");
            d.retained_far.push_back(it->second->at("far").get<double>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("malformed report: ") + e.what());
    }
    return d;
}

std::vector<ReportDigest> load_report_digests(const std::string& dir) {
    static const std::regex name_re(R"(report_(-?\d+)\.json)");
    std::vector<std::pair<int, fs::path>> files;
    std::error_code ec;
    for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
        std::smatch m;
        const auto name = it->path().filename().string();
        if (std::regex_match(name, m, name_re)) files.emplace_back(std::stoi(m[1].str()), it->path());
    }
    if (ec) throw Error("cannot read report directory '" + dir + "': " + ec.message());
    std::sort(files.begin(), files.end());
    std::vector<ReportDigest> out;
    for (const auto& [slice, path] : files) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open '" + path.string() + "'");
        std::ostringstream text;
        text << in.rdbuf();
        out.push_back(digest_from_json(text.str()));
    }
    return out;
}

EvalSummary evaluate(const std::vector<ReportDigest>& reports, const GroundTruth& truth) {
    EvalSummary s;
    std::map<int, const ReportDigest*> by_slice;
    for (const auto& r : reports) {
        by_slice[r.slice] = &r;
        if (!r.analyzed) continue;
        ++s.analyzed_slices;
        s.retained_groups += r.retained_far.size();
        for (const double far : r.retained_far) s.max_far = std::max(s.max_far, far);
    }
    for (const auto& dep : truth.dependences) {
        for (int t = dep.first; t <= dep.last; ++t) {
            ++s.planted_slices;
            bool hit = false;
            const auto it = by_slice.find(t);
            if (it != by_slice.end()) {
                for (const auto& group : it->second->dominating) {
                    if (std::find(group.begin(), group.end(), dep.factor) != group.end()) hit = true;
                }
            }
            if (hit) ++s.recovered_slices;
            else s.missed.push_back(t);
        }
    }
    if (s.planted_slices > 0) {
        s.recall = static_cast<double>(s.recovered_slices) / static_cast<double>(s.planted_slices);
    }
    return s;
}

std::string eval_to_json(const EvalSummary& s) {
    ordered_json j;
    j["planted_slices"] = s.planted_slices;
    j["recovered_slices"] = s.recovered_slices;
    j["recall"] = s.recall;
    j["analyzed_slices"] = s.analyzed_slices;
    j["retained_groups"] = s.retained_groups;
    j["max_far"] = s.max_far;
    j["missed"] = s.missed;
    return j.dump(1) + "\n";
}

}  // namespace tca
