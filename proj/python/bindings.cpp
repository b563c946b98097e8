#include "tca/engine.hpp"
#include "tca/error.hpp"
#include "tca/influence.hpp"
#include "tca/report_io.hpp"
#include "tca/synthetic.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;

namespace {

tca::QualityFn quality_from(const std::string& name, double param) {
    const auto kind = tca::parse_quality_kind(name);
    if (!kind) throw tca::ConfigError("unknown quality '" + name + "'");
    switch (*kind) {
        case tca::QualityKind::FloorPower: return tca::QualityFn::floor_power(param);
        case tca::QualityKind::MinPP: return tca::QualityFn::min_pp();
        case tca::QualityKind::Weighted: return tca::QualityFn::weighted(param);
    }
    return tca::QualityFn::floor_power(param);
}

tca::Bits to_bits(const std::vector<int>& v) { return {v.begin(), v.end()}; }

std::vector<std::string> report_texts(const tca::Portfolio& raw, const tca::EngineConfig& config) {
    config.validate();
    std::vector<std::string> out;
    for (const auto& r : tca::analyze_portfolio(raw, config)) out.push_back(tca::report_to_json(r, config));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Influence analysis of market factors on trading performance";

    py::register_exception<tca::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<tca::SpecError>(m, "SpecError", PyExc_ValueError);
    py::register_exception<tca::ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<tca::DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<tca::UndefinedError>(m, "UndefinedError", PyExc_ArithmeticError);

    py::class_<tca::EngineConfig>(m, "EngineConfig")
        .def(py::init<>())
        .def_readwrite("q", &tca::EngineConfig::q)
        .def_readwrite("r", &tca::EngineConfig::r)
        .def_readwrite("tau", &tca::EngineConfig::tau)
        .def_readwrite("min_orders", &tca::EngineConfig::min_orders)
        .def_readwrite("pairs_enabled", &tca::EngineConfig::pairs_enabled)
        .def_readwrite("weight_u", &tca::EngineConfig::weight_u)
        .def_readwrite("score_window", &tca::EngineConfig::score_window)
        .def_readwrite("score_min_history", &tca::EngineConfig::score_min_history)
        .def_readwrite("threads", &tca::EngineConfig::threads)
        .def_readwrite("causal", &tca::EngineConfig::causal)
        .def_readwrite("seed", &tca::EngineConfig::seed)
        .def_property(
            "quality", [](const tca::EngineConfig& c) { return std::string(tca::quality_kind_name(c.quality)); },
            [](tca::EngineConfig& c, const std::string& name) {
                const auto kind = tca::parse_quality_kind(name);
                if (!kind) throw tca::ConfigError("unknown quality '" + name + "'");
                c.quality = *kind;
            })
        .def("load_detector_config",
             [](tca::EngineConfig& c, const std::string& path) { c.detectors = tca::load_detector_params(path); })
        .def("validate", &tca::EngineConfig::validate);

    py::class_<tca::PortfolioSlice>(m, "PortfolioSlice")
        .def_readonly("slice", &tca::PortfolioSlice::slice)
        .def_readonly("pe", &tca::PortfolioSlice::pe)
        .def_property_readonly("orders",
                               [](const tca::PortfolioSlice& s) {
                                   std::vector<int> ids;
                                   for (const auto o : s.orders) ids.push_back(o.value);
                                   return ids;
                               })
        .def("factor", [](const tca::PortfolioSlice& s, std::size_t col) {
            if (col >= s.factors.cols()) throw py::index_error("factor column out of range");
            const auto c = s.factors.column(col);
            return std::vector<double>(c.begin(), c.end());
        });

    m.def("load_portfolio", &tca::load_portfolio_file, py::arg("path"), "Read a portfolio CSV");
    m.def(
        "generate_synthetic",
        [](const std::string& spec_path, std::optional<std::uint64_t> seed) {
            auto spec = tca::load_synthetic_spec(spec_path);
            if (seed) spec.seed = *seed;
            auto generated = tca::generate_synthetic(spec);
            std::ostringstream truth;
            tca::write_ground_truth(truth, generated.truth);
            return py::make_tuple(std::move(generated.portfolio), truth.str());
        },
        py::arg("spec_path"), py::arg("seed") = py::none(),
        "Generate (portfolio, ground truth text) from a synthetic spec file");
    m.def(
        "write_portfolio",
        [](const tca::Portfolio& p) {
            std::ostringstream out;
            tca::write_portfolio(out, p);
            return out.str();
        },
        py::arg("portfolio"), "Portfolio as CSV text");
    m.def("enrich", &tca::enrich, py::arg("portfolio"), py::arg("config"),
          "Slices carrying the 28 explanatory factors");
    m.def("analyze_reports", &report_texts, py::arg("portfolio"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>(), "One JSON report per slice");
    m.def(
        "run_analysis",
        [](const tca::Portfolio& p, const tca::EngineConfig& c, const std::string& out_dir) {
            c.validate();
            const auto s = tca::run_analysis(p, c, out_dir);
            return py::dict(py::arg("slices") = s.slices, py::arg("analyzed") = s.analyzed,
                            py::arg("skipped") = s.skipped);
        },
        py::arg("portfolio"), py::arg("config"), py::arg("out_dir"), "Write reports, heatmap and zones");
    m.def(
        "evaluate",
        [](const std::string& reports_dir, const std::string& truth_path) {
            return tca::eval_to_json(
                tca::evaluate(tca::load_report_digests(reports_dir), tca::load_ground_truth(truth_path)));
        },
        py::arg("reports_dir"), py::arg("truth_path"), "Evaluation summary as JSON text");

    m.def(
        "binarize",
        [](const std::vector<double>& pe, double q) {
            const auto b = tca::binarize(pe, q);
            return py::make_tuple(b.threshold, std::vector<int>(b.y.begin(), b.y.end()));
        },
        py::arg("pe"), py::arg("q"), "(threshold, y) with y = 1 for PE below the q-quantile");
    m.def(
        "fit_two_sided",
        [](const std::vector<double>& z, const std::vector<int>& y, const std::string& quality, double param,
           bool pinned) {
            const auto p = tca::fit_two_sided(z, to_bits(y), quality_from(quality, param), pinned);
            return py::dict(py::arg("theta_minus") = p.theta_minus, py::arg("theta_plus") = p.theta_plus,
                            py::arg("power") = p.power, py::arg("p1") = p.p1, py::arg("p0") = p.p0);
        },
        py::arg("z"), py::arg("y"), py::arg("quality") = "floor", py::arg("param") = tca::kDefaultFloorPower,
        py::arg("pinned") = false, "Best two-sided alarm rule for one factor");
    m.def(
        "mir", [](const std::vector<int>& yhat, const std::vector<int>& y) { return tca::mir(to_bits(yhat), to_bits(y)); },
        py::arg("yhat"), py::arg("y"), "Mutual information ratio I(Z;Y)/H(Y)");
    m.def("mir_from_rates", &tca::mir_from_rates, py::arg("mu1"), py::arg("p1"), py::arg("p0"));
    m.def("factor_names", [] {
        std::vector<std::string> names;
        for (const auto& f : tca::factor_set()) names.push_back(f.name);
        return names;
    });
    m.def("group_count", [] { return tca::kGroupCount; });
}
