// JSON crosses the boundary as text; the Python package decodes it.

#include "bernstein/expfit.hpp"
#include "bernstein/lab.hpp"
#include "bernstein/quotient.hpp"
#include "bernstein/restriction.hpp"
#include "bernstein/zeros.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace bernstein;
using nlohmann::json;

namespace {

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::ConfigInvalid, std::string("malformed JSON: ") + e.what());
    }
}

std::string extremal(const std::string& curve, int k, double r, int precision_bits) {
    const CurveSpec c = curve_from_json(parse(curve));
    const int bits = std::max(precision_bits, precision_for_degree(k));
    py::gil_scoped_release release;
    return extremal_quotient(k, c, r, bits).to_json().dump();
}

std::string fit(const std::vector<int>& ks, const std::vector<double>& log_quotients, double r, int k_floor) {
    require(ks.size() == log_quotients.size(), "ks and log_quotients must have equal length");
    std::vector<QuotientEstimate> est;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        QuotientEstimate q;
        q.k = ks[i];
        q.r = r;
        q.log_quotient = log_quotients[i];
        est.push_back(q);
    }
    return fit_exponent(est, k_floor).to_json().dump();
}

std::string normalize(const std::string& config) { return ExperimentConfig::from_json(parse(config)).to_json().dump(); }

std::string run(const std::string& config) {
    const ExperimentConfig cfg = ExperimentConfig::from_json(parse(config));
    RunResult res;
    {
        py::gil_scoped_release release;
        res = run_config(cfg);
    }
    json out = res.report;
    out["exit_status"] = res.exit_status;
    out["csv_path"] = res.csv_path.string();
    out["json_path"] = res.json_path.string();
    return out.dump();
}

std::vector<std::string> zoo_names() {
    std::vector<std::string> names;
    for (const auto& [name, spec] : zoo()) names.push_back(name);
    return names;
}

}  // namespace

PYBIND11_MODULE(_bernstein_lab, m) {
    static py::exception<Error> lab_error(m, "LabError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = lab_error;
            py::object inst = err(e.what());
            inst.attr("code") = std::string(error_name(e.code()));
            PyErr_SetObject(err.ptr(), inst.ptr());
        }
    });

    m.def("jensen_constant", [] { return jensen_constant(); });
    m.def("precision_for_degree", &precision_for_degree, py::arg("k"));
    m.def("zoo_names", &zoo_names);
    m.def("extremal_quotient", &extremal, py::arg("curve"), py::arg("k"), py::arg("r") = 1.0,
          py::arg("precision_bits") = 0);
    m.def("fit_exponent", &fit, py::arg("ks"), py::arg("log_quotients"), py::arg("r") = 1.0, py::arg("k_floor") = 2);
    m.def("normalize_config", &normalize, py::arg("config"));
    m.def("run_config", &run, py::arg("config"));
}
