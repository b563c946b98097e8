#include "tca/engine.hpp"
#include "tca/error.hpp"
#include "tca/report_io.hpp"
#include "tca/synthetic.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct EngineOptions {
    tca::EngineConfig config;
    std::string quality = "floor";
    std::string detector_config;
    std::optional<std::uint64_t> seed;
    bool offline = false;
};

void add_engine_options(CLI::App& cmd, EngineOptions& o) {
    auto& c = o.config;
    cmd.add_option("--q", c.q, "Quantile defining bad performance")->capture_default_str();
    cmd.add_option("--r", c.r, "Floor power for retained groups")->capture_default_str();
    cmd.add_option("--tau", c.tau, "Smoothing scale in slices")->capture_default_str();
    cmd.add_flag("--pairs,!--no-pairs", c.pairs_enabled, "Evaluate factor pairs")->capture_default_str();
    cmd.add_option("--min-orders", c.min_orders, "Minimum active orders to analyse a slice")
        ->capture_default_str();
    cmd.add_option("--quality", o.quality, "Quality function")
        ->check(CLI::IsMember({"floor", "min", "weighted"}))
        ->capture_default_str();
    cmd.add_option("--weight-u", c.weight_u, "Weight of p1 for --quality weighted")->capture_default_str();
    cmd.add_option("--detector-config", o.detector_config, "Detector parameter file")
        ->check(CLI::ExistingFile);
    cmd.add_option("--score-window", c.score_window, "Rarity score window W")->capture_default_str();
    cmd.add_option("--score-min-history", c.score_min_history, "Values needed before a score is emitted")
        ->capture_default_str();
    cmd.add_option("--threads", c.threads, "Worker threads within a slice")->capture_default_str();
    cmd.add_flag("--offline", o.offline, "Align anomaly intensities on the slice they describe");
}

tca::EngineConfig finish(EngineOptions& o) {
    auto c = o.config;
    c.quality = *tca::parse_quality_kind(o.quality);
    if (!o.detector_config.empty()) c.detectors = tca::load_detector_params(o.detector_config);
    if (o.seed) c.seed = *o.seed;
    c.causal = !o.offline;
    c.validate();
    return c;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw tca::Error("cannot write '" + path.string() + "'");
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Influence analysis of market factors on trading performance"};
    app.require_subcommand(1);

    EngineOptions analyze_opts;
    std::string input;
    std::string analyze_spec;
    std::string analyze_out = "out";
    auto* analyze = app.add_subcommand("analyze", "Analyse a portfolio CSV (or a synthetic spec)");
    auto* input_opt = analyze->add_option("input", input, "Portfolio CSV")->check(CLI::ExistingFile);
    analyze->add_option("--spec", analyze_spec, "Generate the portfolio from a synthetic spec")
        ->check(CLI::ExistingFile)
        ->excludes(input_opt);
    analyze->add_option("--out-dir", analyze_out, "Output directory")->capture_default_str();
    analyze->add_option("--seed", analyze_opts.seed, "Seed override for --spec");
    add_engine_options(*analyze, analyze_opts);

    std::string synth_spec;
    std::string synth_out = "synthetic";
    std::optional<std::uint64_t> synth_seed;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic portfolio and its ground truth");
    synth->add_option("spec", synth_spec, "Synthetic spec file")->required()->check(CLI::ExistingFile);
    synth->add_option("--out-dir", synth_out, "Output directory")->capture_default_str();
    synth->add_option("--seed", synth_seed, "Seed override");

    std::string reports_dir;
    std::string truth_path;
    std::string eval_out;
    auto* eval = app.add_subcommand("eval", "Score reports against planted ground truth");
    eval->add_option("reports", reports_dir, "Directory holding report_<t>.json")
        ->required()
        ->check(CLI::ExistingDirectory);
    eval->add_option("truth", truth_path, "Ground truth file")->required()->check(CLI::ExistingFile);
    eval->add_option("--out", eval_out, "Also write the summary to this file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) {
            if (input.empty() && analyze_spec.empty()) {
                std::cerr << "analyze: give a portfolio CSV or --spec\n";
                return 2;
            }
            const auto config = finish(analyze_opts);
            tca::Portfolio portfolio;
            if (!analyze_spec.empty()) {
                auto spec = tca::load_synthetic_spec(analyze_spec);
                if (analyze_opts.seed) spec.seed = *analyze_opts.seed;
                portfolio = tca::generate_synthetic(spec).portfolio;
            } else {
                portfolio = tca::load_portfolio_file(input);
            }
            const auto summary = tca::run_analysis(portfolio, config, analyze_out);
            std::cout << "slices " << summary.slices << ", analysed " << summary.analyzed
                      << ", skipped " << summary.skipped << " -> " << analyze_out << '\n';
        } else if (synth->parsed()) {
            auto spec = tca::load_synthetic_spec(synth_spec);
            if (synth_seed) spec.seed = *synth_seed;
            const auto generated = tca::generate_synthetic(spec);
            const std::filesystem::path dir(synth_out);
            std::filesystem::create_directories(dir);
            std::ofstream csv(dir / "portfolio.csv", std::ios::binary);
            if (!csv) throw tca::Error("cannot write portfolio.csv");
            tca::write_portfolio(csv, generated.portfolio);
            std::ofstream truth(dir / "ground_truth.txt", std::ios::binary);
            if (!truth) throw tca::Error("cannot write ground_truth.txt");
            tca::write_ground_truth(truth, generated.truth);
            std::cout << "wrote " << generated.portfolio.size() << " slices to " << synth_out << '\n';
        } else if (eval->parsed()) {
            const auto summary =
                tca::evaluate(tca::load_report_digests(reports_dir), tca::load_ground_truth(truth_path));
            const auto text = tca::eval_to_json(summary);
            std::cout << text;
            if (!eval_out.empty()) write_text(eval_out, text);
        }
    } catch (const tca::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
