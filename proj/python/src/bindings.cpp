// Thin Python layer over the experiment driver and a few closed-form helpers.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mddthz/channel.hpp"
#include "mddthz/harness.hpp"

namespace py = pybind11;
using namespace mddthz;

namespace {

std::string as_text(const py::handle& v) {
    if (py::isinstance<py::bool_>(v)) return v.cast<bool>() ? "true" : "false";
    if (py::isinstance<py::float_>(v)) {
        std::ostringstream os;
        os.precision(17);
        os << v.cast<double>();
        return os.str();
    }
    return py::str(v).cast<std::string>();
}

ExperimentConfig config_from(const py::dict& d) {
    KeyValues kv;
    for (const auto& [k, v] : d) {
        // scheme lists may come as Python lists
        if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
            std::string joined;
            for (const auto& x : v) joined += (joined.empty() ? "" : ",") + as_text(x);
            kv.set(py::str(k), joined);
        } else {
            kv.set(py::str(k), as_text(v));
        }
    }
    ExperimentConfig cfg;
    apply_experiment_keys(kv, cfg);
    return cfg;
}

py::dict cdf_dict(const CdfSummary& c) {
    py::dict d;
    d["scheme"] = c.scheme;
    d["likely90"] = c.likely90;
    d["median"] = c.likely50;
    d["likely10"] = c.likely10;
    d["mean"] = c.mean;
    return d;
}

py::dict run(const py::dict& config) {
    ExperimentConfig cfg = config_from(config);
    ExperimentResult r;
    {
        py::gil_scoped_release nogil;
        r = run_experiment(cfg);
    }
    py::dict out;
    py::dict per;
    for (Scheme s : cfg.schemes) {
        py::dict d;
        d["objectives"] = r.objectives(s);
        d["device_rates"] = r.device_rates(s);
        d["trial_medians"] = r.trial_medians(s);
        d["cdf"] = cdf_dict(emit_cdf(r, s));
        per[py::str(to_string(s))] = d;
    }
    out["schemes"] = per;
    std::vector<std::uint64_t> seeds;
    std::vector<bool> flagged;
    for (const auto& t : r.trials) {
        seeds.push_back(t.seed);
        flagged.push_back(t.flagged);
    }
    out["trial_seeds"] = seeds;
    out["flagged"] = flagged;
    out["config"] = experiment_keys(cfg);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "MDD two-tier THz fronthaul cell-free simulator";
    m.def("version", [] { return std::string(version_string()); });
    m.def("schemes", [] {
        std::vector<std::string> v;
        for (Scheme s : all_schemes()) v.push_back(to_string(s));
        return v;
    });
    m.def("default_config", [] { return experiment_keys(ExperimentConfig{}); },
          "Every config key with its default value, as strings.");
    m.def("run", &run, py::arg("config") = py::dict(),
          "Run a Monte Carlo experiment. Keys are the same as in the .cfg files; "
          "out_dir, when given, also writes the CSV outputs.");
    m.def("path_gain_db", [](double f, double d, double k) { return linear_to_db(path_gain_los(f, d, k)); },
          py::arg("f_hz"), py::arg("d_m"), py::arg("absorption_per_m") = 0.0033);
    m.def(
        "tdd_fractions",
        [](double c_cc, double c_ca, double c_ad, double tau_gp) {
            const auto t = solve_tdd_fractions(c_cc, c_ca, c_ad, tau_gp);
            py::dict d;
            d["tau_cc"] = t.tau_cc;
            d["tau_ca"] = t.tau_ca;
            d["tau_ad"] = t.tau_ad;
            d["tau_gp"] = t.tau_gp;
            d["objective"] = t.objective;
            return d;
        },
        py::arg("c_cc"), py::arg("c_ca"), py::arg("c_ad"), py::arg("tau_gp") = 0.05);
    m.def("cdf", [](std::vector<double> rates) { return cdf_dict(make_cdf(std::move(rates))); },
          "90%-likely, median, 10%-likely and mean of a rate sample.");
}
