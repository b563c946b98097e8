#pragma once

#include "tca/engine.hpp"
#include "tca/synthetic.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace tca {

/// One JSON document per slice. Infinite thresholds are written as the
/// strings "-inf" and "inf".
std::string report_to_json(const InfluenceReport& report, const EngineConfig& config);

/// Rows are groups in all_groups() order, columns are slices; skipped slices
/// leave empty cells.
void write_heatmap(std::ostream& out, const std::vector<InfluenceReport>& reports);

/// slice,factor,theta_minus,theta_plus,triggered (space-separated order ids).
void write_alarm_zones(std::ostream& out, const std::vector<InfluenceReport>& reports);

struct RunSummary {
    std::size_t slices = 0;
    std::size_t analyzed = 0;
    std::size_t skipped = 0;
};

/// Streams the raw portfolio through enrichment and analysis and writes
/// report_<t>.json, influence_heatmap.csv and alarm_zones.csv into out_dir
/// (created if needed).
RunSummary run_analysis(const Portfolio& raw, const EngineConfig& config, const std::string& out_dir);

/// What evaluation needs from a report.
struct ReportDigest {
    int slice = 0;
    bool analyzed = false;
    std::vector<std::vector<std::size_t>> dominating;  // factor ids per group
    std::vector<double> retained_far;
};

ReportDigest digest_of(const InfluenceReport& report);
/// Throws ParseError on malformed documents.
ReportDigest digest_from_json(const std::string& text);
/// Reads every report_<t>.json in a directory, ordered by slice.
std::vector<ReportDigest> load_report_digests(const std::string& dir);

struct EvalSummary {
    std::size_t planted_slices = 0;
    std::size_t recovered_slices = 0;
    double recall = 0.0;          // recovered / planted; 0 when nothing planted
    std::size_t analyzed_slices = 0;
    std::size_t retained_groups = 0;
    double max_far = 0.0;         // over all retained groups of all reports
    std::vector<int> missed;      // planted slices without recovery
};

/// A planted slice is recovered when some dominating group contains the
/// planted factor.
EvalSummary evaluate(const std::vector<ReportDigest>& reports, const GroundTruth& truth);

std::string eval_to_json(const EvalSummary& summary);

}  // namespace tca
