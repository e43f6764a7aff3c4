#include "dtwin/agent.hpp"
#include "dtwin/channel.hpp"
#include "dtwin/error.hpp"
#include "dtwin/localization.hpp"
#include "dtwin/metrics.hpp"
#include "dtwin/raytrace.hpp"
#include "dtwin/scenario.hpp"
#include "dtwin/scene.hpp"
#include "dtwin/simcore.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>

namespace py = pybind11;
using namespace dtwin;

namespace {

py::object to_python(const nlohmann::json& doc) {
    return py::module_::import("json").attr("loads")(doc.dump());
}

nlohmann::json from_python(const py::object& obj) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

Pose pose_from(const Vec3& position, double yaw, const Vec3& velocity) {
    Pose p;
    p.position = position;
    p.orientation.yaw = yaw;
    p.velocity = velocity;
    return p;
}

py::dict record_to_python(const TraceRecord& r) {
    py::list agents;
    for (const auto& a : r.agents) {
        py::dict d;
        d["agent_id"] = a.agent_id;
        d["true_pose"] = py::make_tuple(a.true_pose.position.x(), a.true_pose.position.y(), a.true_pose.orientation.yaw);
        d["dt_pose"] = py::make_tuple(a.dt_pose.position.x(), a.dt_pose.position.y(), a.dt_pose.orientation.yaw);
        d["estimate"] = py::make_tuple(a.estimate.x(), a.estimate.y());
        d["score"] = a.score;
        d["control"] = py::make_tuple(a.control.linear, a.control.angular);
        d["rates"] = a.rates;
        agents.append(d);
    }
    py::dict out;
    out["step"] = r.step;
    out["time_s"] = r.time;
    out["agents"] = agents;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Ray tracing, channel synthesis, fingerprint localization and closed-loop simulation";

    static py::exception<Error> error_type(m, "DtwinError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const std::string text = std::string(to_string(e.code())) + ": " + e.what();
            PyErr_SetString(error_type.ptr(), text.c_str());
        }
    });

    py::class_<Scene>(m, "Scene")
        .def_property_readonly("num_surfaces", [](const Scene& s) { return s.surfaces.size(); })
        .def_property_readonly("hash", [](const Scene& s) { return scene_hash(s); })
        .def("floor_grid", [](const Scene& s, double spacing, double height) { return floor_grid(s, spacing, height); },
             py::arg("spacing"), py::arg("height"))
        .def("to_json", [](const Scene& s) { return to_python(serialize_scene(s)); });

    m.def("load_scene_file", &load_scene_file, py::arg("path"));
    m.def("load_scene", [](const py::object& doc) { return load_scene(from_python(doc)); }, py::arg("doc"));

    py::class_<PropagationPath>(m, "PropagationPath")
        .def_readonly("gain", &PropagationPath::gain)
        .def_readonly("delay", &PropagationPath::delay)
        .def_readonly("doppler", &PropagationPath::doppler)
        .def_readonly("order", &PropagationPath::order)
        .def_readonly("length", &PropagationPath::length)
        .def_readonly("surfaces", &PropagationPath::surfaces)
        .def_property_readonly("aoa", [](const PropagationPath& p) { return py::make_tuple(p.aoa.azimuth, p.aoa.elevation); })
        .def_property_readonly("aod", [](const PropagationPath& p) { return py::make_tuple(p.aod.azimuth, p.aod.elevation); })
        .def("__repr__", [](const PropagationPath& p) {
            return "<PropagationPath order=" + std::to_string(p.order) + " length=" + std::to_string(p.length) + ">";
        });

    py::class_<PathSet>(m, "PathSet")
        .def_readonly("paths", &PathSet::paths)
        .def_readonly("carrier_freq", &PathSet::carrier_freq)
        .def("__len__", [](const PathSet& ps) { return ps.paths.size(); });

    m.def(
        "trace_paths",
        [](const Scene& scene, const Vec3& tx, const Vec3& rx, int max_order, double carrier_freq, double min_gain,
           double tx_yaw, double rx_yaw, const Vec3& tx_velocity, const Vec3& rx_velocity) {
            const TracingScene tracing(scene);
            return trace_paths(tracing, pose_from(tx, tx_yaw, tx_velocity), pose_from(rx, rx_yaw, rx_velocity),
                               RayTraceOptions{max_order, min_gain}, carrier_freq);
        },
        py::arg("scene"), py::arg("tx"), py::arg("rx"), py::arg("max_order") = 2, py::arg("carrier_freq") = 2.4e9,
        py::arg("min_gain") = 1e-9, py::arg("tx_yaw") = 0.0, py::arg("rx_yaw") = 0.0,
        py::arg("tx_velocity") = Vec3::Zero().eval(), py::arg("rx_velocity") = Vec3::Zero().eval());

    py::class_<ArrayConfig>(m, "ArrayConfig")
        .def(py::init([](int n, double spacing, double boresight) { return ArrayConfig{n, spacing, boresight}; }),
             py::arg("num_elements"), py::arg("spacing"), py::arg("boresight") = 0.0)
        .def_readwrite("num_elements", &ArrayConfig::num_elements)
        .def_readwrite("spacing", &ArrayConfig::spacing)
        .def_readwrite("boresight", &ArrayConfig::boresight);
    m.def("half_wavelength_array", &half_wavelength_array, py::arg("num_elements"), py::arg("carrier_freq"),
          py::arg("boresight") = 0.0);

    py::class_<OfdmParams>(m, "OfdmParams")
        .def(py::init(&OfdmParams::make), py::arg("num_subcarriers"), py::arg("num_symbols"),
             py::arg("subcarrier_spacing"), py::arg("carrier_freq"))
        .def_readonly("num_subcarriers", &OfdmParams::num_subcarriers)
        .def_readonly("num_symbols", &OfdmParams::num_symbols)
        .def_readonly("subcarrier_spacing", &OfdmParams::subcarrier_spacing)
        .def_readonly("symbol_duration", &OfdmParams::symbol_duration)
        .def_readonly("carrier_freq", &OfdmParams::carrier_freq);

    m.def("synthesize_channel", &synthesize_channel, py::arg("paths"), py::arg("tx_array"), py::arg("rx_array"),
          py::arg("n"), py::arg("k"), py::arg("params"));
    m.def("mrt_beamformer", &mrt_beamformer, py::arg("H"));
    m.def("achievable_rate", &achievable_rate, py::arg("H"), py::arg("w"), py::arg("power"), py::arg("noise_power"),
          py::arg("interference") = 0.0);

    m.def(
        "compute_mdp",
        [](const PathSet& ps, double bin_width, std::size_t num_bins) { return compute_mdp(ps, bin_width, num_bins).bins; },
        py::arg("paths"), py::arg("bin_width"), py::arg("num_bins") = default_num_bins);
    m.def(
        "mdp_distance",
        [](const std::vector<double>& a, const std::vector<double>& b, double bin_width) {
            return mdp_distance(Mdp{a, bin_width, {}, 0}, Mdp{b, bin_width, {}, 0});
        },
        py::arg("a"), py::arg("b"), py::arg("bin_width") = 1.0);

    m.def(
        "diff_drive_step",
        [](double x, double y, double yaw, double v, double w, double dt) {
            const Pose p = diff_drive_step(pose_from({x, y, 0.0}, yaw, Vec3::Zero()), {v, w}, dt);
            return py::make_tuple(p.position.x(), p.position.y(), p.orientation.yaw);
        },
        py::arg("x"), py::arg("y"), py::arg("yaw"), py::arg("v"), py::arg("w"), py::arg("dt"));

    py::class_<ScenarioConfig>(m, "Scenario")
        .def_property(
            "seed", [](const ScenarioConfig& c) { return c.sim.seed; },
            [](ScenarioConfig& c, std::uint64_t s) { c.sim.seed = s; })
        .def_property(
            "max_steps", [](const ScenarioConfig& c) { return c.sim.max_steps; },
            [](ScenarioConfig& c, std::int64_t n) { c.sim.max_steps = n; })
        .def_property(
            "db_path", [](const ScenarioConfig& c) { return c.db.path; },
            [](ScenarioConfig& c, const std::optional<std::filesystem::path>& p) { c.db.path = p; })
        .def_property(
            "trace_csv", [](const ScenarioConfig& c) { return c.trace_csv; },
            [](ScenarioConfig& c, const std::optional<std::filesystem::path>& p) { c.trace_csv = p; })
        .def_property_readonly("scene_path", [](const ScenarioConfig& c) { return c.scene_path; })
        .def_property_readonly("agent_ids", [](const ScenarioConfig& c) {
            std::vector<std::string> ids;
            for (const auto& a : c.agents) ids.push_back(a.id);
            return ids;
        });

    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("validate_scenario", &validate_scenario, py::arg("scenario"));

    py::class_<FingerprintDB>(m, "FingerprintDB")
        .def_property_readonly("num_points", [](const FingerprintDB& db) { return db.points.size(); })
        .def_readonly("ap_ids", &FingerprintDB::ap_ids)
        .def_readonly("bin_width", &FingerprintDB::bin_width)
        .def_readonly("num_bins", &FingerprintDB::num_bins)
        .def_readonly("points", &FingerprintDB::points)
        .def("profile", [](const FingerprintDB& db, std::size_t point, const std::string& ap) {
            const auto s = db.profile(point, db.ap_index(ap));
            return std::vector<double>(s.begin(), s.end());
        });

    m.def("build_database", &build_database, py::arg("scenario"));
    m.def("write_fingerprint_db", &write_fingerprint_db, py::arg("db"), py::arg("path"));
    m.def("read_fingerprint_db", &read_fingerprint_db, py::arg("path"));

    py::class_<Localizer>(m, "Localizer")
        .def(py::init<const FingerprintDB&>(), py::arg("db"), py::keep_alive<1, 2>())
        .def(
            "locate",
            [](const Localizer& l, const std::map<std::string, std::vector<double>>& profiles, double bin_width) {
                std::map<std::string, Mdp> measured;
                for (const auto& [id, bins] : profiles) measured[id] = Mdp{bins, bin_width, id, 0};
                const LocationEstimate e = l.locate(measured);
                return py::make_tuple(e.position, e.score, e.index);
            },
            py::arg("profiles"), py::arg("bin_width"));

    m.def(
        "run_simulation",
        [](const ScenarioConfig& c, const std::optional<std::filesystem::path>& trace_csv) {
            std::vector<TraceRecord> records;
            {
                py::gil_scoped_release release;
                records = run_simulation(c, trace_csv);
            }
            py::list out;
            for (const auto& r : records) out.append(record_to_python(r));
            return py::make_tuple(out, to_python(summary_to_json(summarize_run(records))));
        },
        py::arg("scenario"), py::arg("trace_csv") = std::nullopt,
        "Runs the scenario; returns (records, summary).");

    m.def(
        "summarize_trace",
        [](const std::filesystem::path& path) { return to_python(summary_to_json(summarize_trace(read_trace_csv(path)))); },
        py::arg("path"));
}
