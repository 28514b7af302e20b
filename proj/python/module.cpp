#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "fairflow/app.hpp"
#include "fairflow/config.hpp"
#include "fairflow/io.hpp"
#include "fairflow/sim.hpp"

namespace py = pybind11;
using namespace fairflow;

namespace {

Scenario preset_scenario(const std::string& name, std::size_t point) {
    const auto p = find_preset(name);
    if (point >= p.points.size()) throw py::index_error("preset point out of range");
    return p.points[point].scenario;
}

py::array_t<double> column(const std::vector<TraceRow>& rows, auto get) {
    py::array_t<double> a(static_cast<py::ssize_t>(rows.size()));
    auto m = a.mutable_unchecked<1>();
    for (std::size_t i = 0; i < rows.size(); ++i) m(static_cast<py::ssize_t>(i)) = get(rows[i]);
    return a;
}

py::dict summary_dict(const RunSummary& s) {
    py::dict d;
    d["policy"] = s.policy;
    d["status"] = s.status;
    d["cumulative_revenue"] = s.revenue;
    d["peak_I"] = s.peak_I;
    d["frac_time_I_over_theta"] = s.frac_I_over;
    d["peak_q"] = s.peak_q;
    d["frac_time_q_over_qmax"] = s.frac_q_over;
    d["fallback_epochs"] = s.fallback_epochs;
    d["mean_price"] = s.mean_price;
    d["mean_alpha"] = s.mean_alpha;
    return d;
}

// Trace columns as numpy arrays plus the run summary.
py::dict run_scenario(Scenario scn, const std::string& policy) {
    scn.cfg.policy = parse_policy(policy);
    RunResult r;
    {
        py::gil_scoped_release release;
        r = run(scn);
    }
    const auto& rows = r.rows;
    py::dict cols;
    cols["t"] = column(rows, [](const TraceRow& x) { return x.t; });
    cols["epoch"] = column(rows, [](const TraceRow& x) { return double(x.epoch); });
    for (std::size_t i = 0; i < scn.num_classes(); ++i) {
        const auto s = std::to_string(i + 1);
        cols[py::str("K_" + s)] = column(rows, [i](const TraceRow& x) { return x.K[i]; });
        cols[py::str("x_" + s)] = column(rows, [i](const TraceRow& x) { return x.x[i]; });
    }
    cols["z"] = column(rows, [](const TraceRow& x) { return x.z; });
    cols["q"] = column(rows, [](const TraceRow& x) { return x.q; });
    cols["alpha"] = column(rows, [](const TraceRow& x) { return x.alpha; });
    cols["p"] = column(rows, [](const TraceRow& x) { return x.p; });
    cols["nu"] = column(rows, [](const TraceRow& x) { return x.nu; });
    cols["mu"] = column(rows, [](const TraceRow& x) { return x.mu; });
    cols["dropout"] = column(rows, [](const TraceRow& x) { return x.dropout; });
    cols["I"] = column(rows, [](const TraceRow& x) { return x.I; });
    cols["revenue_rate"] = column(rows, [](const TraceRow& x) { return x.revenue_rate; });
    cols["revenue"] = column(rows, [](const TraceRow& x) { return x.revenue; });
    cols["eta1_star"] = column(rows, [](const TraceRow& x) { return x.eta1_star; });
    cols["eta2_star"] = column(rows, [](const TraceRow& x) { return x.eta2_star; });
    cols["feasible"] = column(rows, [](const TraceRow& x) { return x.feasible ? 1.0 : 0.0; });

    py::dict out;
    out["status"] = std::string(to_string(r.status));
    out["message"] = r.message;
    out["trace"] = cols;
    out["summary"] = summary_dict(summarize(rows, scn.sp.theta_d, scn.sp.q_max, policy,
                                            std::string(to_string(r.status))));
    return out;
}

}  // namespace

PYBIND11_MODULE(fairflow, m) {
    m.doc() = "Fairness-constrained pricing and admission control (C++ core)";

    py::register_exception<EmptyConsistencySet>(m, "EmptyConsistencySet", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<ClassParams>(m, "ClassParams")
        .def(py::init<double, double>(), py::arg("r1") = 0.0, py::arg("r2") = 0.0)
        .def_readwrite("r1", &ClassParams::r1)
        .def_readwrite("r2", &ClassParams::r2)
        .def("__repr__", [](const ClassParams& c) {
            std::ostringstream s;
            s << "ClassParams(r1=" << c.r1 << ", r2=" << c.r2 << ")";
            return s.str();
        });

    py::class_<SystemParams>(m, "SystemParams")
        .def(py::init<>())
        .def_readwrite("mu_star", &SystemParams::mu_star)
        .def_readwrite("q_c", &SystemParams::q_c)
        .def_readwrite("q_max", &SystemParams::q_max)
        .def_readwrite("p_min", &SystemParams::p_min)
        .def_readwrite("p_max", &SystemParams::p_max)
        .def_readwrite("nu_max", &SystemParams::nu_max)
        .def_readwrite("lambda1", &SystemParams::lambda1)
        .def_readwrite("lambda2", &SystemParams::lambda2)
        .def_readwrite("theta_d", &SystemParams::theta_d)
        .def_readwrite("T_d", &SystemParams::T_d)
        .def_readwrite("T_I", &SystemParams::T_I)
        .def_readwrite("dt", &SystemParams::dt)
        .def("validate", &SystemParams::validate);

    py::class_<ExtendedState>(m, "ExtendedState")
        .def(py::init([](double q, double z, double alpha) { return ExtendedState{q, z, alpha}; }),
             py::arg("q"), py::arg("z"), py::arg("alpha"))
        .def_readwrite("q", &ExtendedState::q)
        .def_readwrite("z", &ExtendedState::z)
        .def_readwrite("alpha", &ExtendedState::alpha);

    py::class_<LieBundle>(m, "LieBundle")
        .def_readonly("Lfb", &LieBundle::Lfb)
        .def_readonly("Lf2b", &LieBundle::Lf2b)
        .def_readonly("LgpLfb", &LieBundle::LgpLfb)
        .def_readonly("LgnuLfb", &LieBundle::LgnuLfb)
        .def_readonly("b", &LieBundle::b);

    m.def("dropout_rate", &dropout_rate, py::arg("cls"), py::arg("p"));
    m.def("service_rate", &service_rate, py::arg("sp"), py::arg("q"));
    m.def("service_rate_slope", &service_rate_slope, py::arg("sp"), py::arg("q"));

    m.def("lie_bundle",
          [](const ExtendedState& s, const std::vector<double>& w, double K,
             const SystemParams& sp, const std::vector<ClassParams>& classes) {
              check_simplex(w, classes.size());
              return lie_bundle(s, w, K, sp, classes);
          },
          py::arg("state"), py::arg("w"), py::arg("K"), py::arg("sp"), py::arg("classes"));
    m.def("eta1",
          [](const ExtendedState& s, double p, double nu, const std::vector<double>& w, double K,
             const SystemParams& sp, const std::vector<ClassParams>& classes) {
              check_simplex(w, classes.size());
              return eta1(s, Control{p, nu}, w, K, sp, classes);
          },
          py::arg("state"), py::arg("p"), py::arg("nu"), py::arg("w"), py::arg("K"),
          py::arg("sp"), py::arg("classes"));

    m.def("vertices",
          [](double z, double d, double p_applied, const std::vector<ClassParams>& classes) {
              return vertices(ConsistencySet{z, d, p_applied, classes});
          },
          py::arg("z"), py::arg("d"), py::arg("p_applied"), py::arg("classes"),
          "Vertices of the set of proportion vectors consistent with (z, d).");
    m.def("state_bounds",
          [](double z, double d, double p_applied, const std::vector<ClassParams>& classes) {
              std::vector<std::tuple<double, double, double>> out;
              for (const auto& b : state_bounds(ConsistencySet{z, d, p_applied, classes})) {
                  out.emplace_back(b.lo, b.hi, b.estimate);
              }
              return out;
          },
          py::arg("z"), py::arg("d"), py::arg("p_applied"), py::arg("classes"),
          "Per-class (lo, hi, estimate) queue bounds.");

    m.def("surge_price", &surge_price, py::arg("rho"), py::arg("sp") = SystemParams{});
    m.def("surge_admission",
          [](double rho, double b1, double b2, double b3) {
              ControllerConfig cfg;
              cfg.b1 = b1;
              cfg.b2 = b2;
              cfg.b3 = b3;
              return surge_admission(rho, cfg);
          },
          py::arg("rho"), py::arg("b1") = -0.129, py::arg("b2") = -0.967,
          py::arg("b3") = -0.096);

    py::class_<FairnessWindow>(m, "FairnessWindow")
        .def(py::init<double, double, bool>(), py::arg("horizon"), py::arg("origin") = 0.0,
             py::arg("evict") = true)
        .def("record", &FairnessWindow::record, py::arg("t"), py::arg("dropout"), py::arg("K"))
        .def("record_ratio", &FairnessWindow::record_ratio, py::arg("t"), py::arg("ratio"))
        .def("index", &FairnessWindow::index, py::arg("t"))
        .def("predict", &FairnessWindow::predict, py::arg("t_now"), py::arg("T_d"),
             py::arg("ratio"))
        .def("__len__", [](const FairnessWindow& w) { return w.samples().size(); });

    py::class_<Scenario>(m, "Scenario")
        .def_static("preset", &preset_scenario, py::arg("name"), py::arg("point") = 0)
        .def_static("from_config", [](const std::string& path) { return parse_config(path); })
        .def_static("from_text",
                    [](const std::string& text) { return parse_config_text(text); })
        .def("set",
             [](Scenario& s, const std::string& key, const py::object& value) {
                 apply_setting(s, key, py::str(value).cast<std::string>());
                 return &s;
             },
             py::return_value_policy::reference_internal)
        .def("validate", &Scenario::validate)
        .def("config_text", &format_config)
        .def("run", &run_scenario, py::arg("policy") = "robust_fair")
        .def_readwrite("name", &Scenario::name)
        .def_readwrite("seed", &Scenario::seed)
        .def_readwrite("t_end", &Scenario::t_end)
        .def_readwrite("sp", &Scenario::sp)
        .def_readwrite("classes", &Scenario::classes);

    m.def("presets", [] {
        std::vector<std::string> names;
        for (const auto& p : presets()) names.push_back(p.name);
        return names;
    });
    m.def("preset_points", [](const std::string& name) {
        std::vector<double> values;
        for (const auto& pt : find_preset(name).points) values.push_back(pt.value);
        return values;
    });
}
