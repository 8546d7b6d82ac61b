#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "csiloc/aoa.hpp"
#include "csiloc/cli.hpp"
#include "csiloc/entropy.hpp"
#include "csiloc/json_io.hpp"
#include "csiloc/locator.hpp"
#include "csiloc/prep.hpp"
#include "csiloc/sim.hpp"
#include "csiloc/trace_io.hpp"

namespace py = pybind11;
using namespace csiloc;

namespace {

// [n_packets, n_rx, n_tx, n_sub] complex array -> trace
CsiTrace trace_from_array(py::array_t<std::complex<double>> arr, const RadioConfig& cfg) {
    const auto buf = arr.request();
    if (buf.ndim != 4) throw py::value_error("expected a 4-d array [packet, rx, tx, sub]");
    const auto* data = static_cast<const std::complex<double>*>(buf.ptr);
    CsiTrace trace;
    trace.config = cfg;
    trace.config.n_rx = static_cast<int>(buf.shape[1]);
    trace.config.n_tx = static_cast<int>(buf.shape[2]);
    trace.config.n_sub = static_cast<int>(buf.shape[3]);
    const auto s0 = buf.strides[0] / static_cast<ssize_t>(sizeof(std::complex<double>));
    const auto s1 = buf.strides[1] / static_cast<ssize_t>(sizeof(std::complex<double>));
    const auto s2 = buf.strides[2] / static_cast<ssize_t>(sizeof(std::complex<double>));
    const auto s3 = buf.strides[3] / static_cast<ssize_t>(sizeof(std::complex<double>));
    for (ssize_t n = 0; n < buf.shape[0]; ++n) {
        CsiPacket pkt(trace.config.n_rx, trace.config.n_tx, trace.config.n_sub,
                      static_cast<double>(n));
        for (int r = 0; r < pkt.n_rx; ++r)
            for (int t = 0; t < pkt.n_tx; ++t)
                for (int k = 0; k < pkt.n_sub; ++k)
                    pkt.at(r, t, k) = data[n * s0 + r * s1 + t * s2 + k * s3];
        trace.packets.push_back(std::move(pkt));
    }
    return trace;
}

py::array_t<std::complex<double>> trace_to_array(const CsiTrace& trace) {
    const auto& c = trace.config;
    py::array_t<std::complex<double>> arr(
        {static_cast<ssize_t>(trace.packets.size()), static_cast<ssize_t>(c.n_rx),
         static_cast<ssize_t>(c.n_tx), static_cast<ssize_t>(c.n_sub)});
    auto view = arr.mutable_unchecked<4>();
    for (ssize_t n = 0; n < view.shape(0); ++n)
        for (int r = 0; r < c.n_rx; ++r)
            for (int t = 0; t < c.n_tx; ++t)
                for (int k = 0; k < c.n_sub; ++k)
                    view(n, r, t, k) = trace.packets[n].at(r, t, k);
    return arr;
}

} // namespace

PYBIND11_MODULE(_csiloc, m) {
    m.doc() = "CSI fingerprint localization core";

    py::register_exception<Error>(m, "CsilocError");

    py::class_<RadioConfig>(m, "RadioConfig")
        .def(py::init<>())
        .def_readwrite("n_rx", &RadioConfig::n_rx)
        .def_readwrite("n_tx", &RadioConfig::n_tx)
        .def_readwrite("n_sub", &RadioConfig::n_sub)
        .def_readwrite("f_c", &RadioConfig::f_c)
        .def_readwrite("f_delta", &RadioConfig::f_delta)
        .def_readwrite("d", &RadioConfig::d);

    py::class_<CsiTrace>(m, "CsiTrace")
        .def_readonly("config", &CsiTrace::config)
        .def("__len__", [](const CsiTrace& t) { return t.packets.size(); })
        .def("to_array", &trace_to_array);

    py::class_<PathComponent>(m, "PathComponent")
        .def(py::init([](double alpha, double phi, double theta_deg, double tau) {
                 return PathComponent{alpha, phi, theta_deg, tau};
             }),
             py::arg("alpha"), py::arg("phi"), py::arg("theta_deg"), py::arg("tau"))
        .def_readwrite("alpha", &PathComponent::alpha)
        .def_readwrite("phi", &PathComponent::phi)
        .def_readwrite("theta_deg", &PathComponent::theta_deg)
        .def_readwrite("tau", &PathComponent::tau);

    py::class_<ImpairmentSpec>(m, "ImpairmentSpec")
        .def(py::init<>())
        .def_readwrite("sfo", &ImpairmentSpec::sfo)
        .def_readwrite("sto_taps", &ImpairmentSpec::sto_taps)
        .def_readwrite("cfo_step", &ImpairmentSpec::cfo_step)
        .def_readwrite("cpo", &ImpairmentSpec::cpo)
        .def_readwrite("cfo_jitter", &ImpairmentSpec::cfo_jitter)
        .def_readwrite("snr_db", &ImpairmentSpec::snr_db);

    m.def("synth_trace", &synth_trace, py::arg("paths"), py::arg("config"),
          py::arg("impairments"), py::arg("n_packets"), py::arg("seed"), py::arg("t0") = 0.0,
          py::arg("dt") = 0.01, "Simulate a multipath trace");
    m.def("trace_from_array", &trace_from_array, py::arg("array"), py::arg("config"));
    m.def("save_trace", &save_trace, py::arg("trace"), py::arg("path"));
    m.def("load_trace", &load_trace, py::arg("path"));

    py::class_<PrepConfig>(m, "PrepConfig")
        .def(py::init<>())
        .def_readwrite("remove_sto", &PrepConfig::remove_sto)
        .def_readwrite("remove_sfo", &PrepConfig::remove_sfo)
        .def_readwrite("cfo_window", &PrepConfig::cfo_window)
        .def_readwrite("tap_filtering", &PrepConfig::tap_filtering)
        .def_readwrite("tap_keep_fraction", &PrepConfig::tap_keep_fraction);

    py::class_<CalibrationReport>(m, "CalibrationReport")
        .def_readonly("sto_taps", &CalibrationReport::sto_taps)
        .def_readonly("sfo_estimate", &CalibrationReport::sfo_estimate)
        .def_readonly("packets_in", &CalibrationReport::packets_in)
        .def_readonly("packets_out", &CalibrationReport::packets_out)
        .def_readonly("min_kept_taps", &CalibrationReport::min_kept_taps);

    m.def(
        "calibrate",
        [](const CsiTrace& t, const PrepConfig& c) {
            auto res = calibrate(t, c);
            return py::make_tuple(std::move(res.trace), res.report);
        },
        py::arg("trace"), py::arg("config") = PrepConfig{},
        "Remove timing/sampling/carrier phase errors; returns (trace, report)");

    py::class_<EntropyConfig>(m, "EntropyConfig")
        .def(py::init<>())
        .def_readwrite("n_packets", &EntropyConfig::n_packets)
        .def_readwrite("p_max", &EntropyConfig::p_max)
        .def_readwrite("grid_size", &EntropyConfig::grid_size);

    py::class_<EntropyFingerprint>(m, "EntropyFingerprint")
        .def_readonly("values", &EntropyFingerprint::values)
        .def_readonly("orders", &EntropyFingerprint::orders)
        .def_readonly("sigma2", &EntropyFingerprint::sigma2)
        .def("__len__", [](const EntropyFingerprint& f) { return f.values.size(); });

    m.def("entropy_fingerprint", &entropy_fingerprint, py::arg("trace"),
          py::arg("config") = EntropyConfig{});

    py::class_<SmoothingConfig>(m, "SmoothingConfig")
        .def(py::init<>())
        .def_readwrite("k_prime", &SmoothingConfig::k_prime)
        .def_readwrite("n_rx_sub", &SmoothingConfig::n_rx_sub)
        .def_readwrite("forward_backward", &SmoothingConfig::forward_backward)
        .def_readwrite("n_packets", &SmoothingConfig::n_packets);

    py::class_<AoaGrid>(m, "AoaGrid")
        .def(py::init<>())
        .def_readwrite("theta_min_deg", &AoaGrid::theta_min_deg)
        .def_readwrite("theta_max_deg", &AoaGrid::theta_max_deg)
        .def_readwrite("theta_step_deg", &AoaGrid::theta_step_deg)
        .def_readwrite("tau_min", &AoaGrid::tau_min)
        .def_readwrite("tau_max", &AoaGrid::tau_max)
        .def_readwrite("tau_step", &AoaGrid::tau_step);

    py::class_<AoaTofFingerprint>(m, "AoaTofFingerprint")
        .def_readonly("theta_deg", &AoaTofFingerprint::theta_deg)
        .def_readonly("tau", &AoaTofFingerprint::tau)
        .def_readonly("peak_power", &AoaTofFingerprint::peak_power)
        .def_readonly("n_sources", &AoaTofFingerprint::n_sources);

    m.def("aoa_fingerprint", &aoa_fingerprint, py::arg("trace"),
          py::arg("smoothing") = SmoothingConfig{}, py::arg("grid") = AoaGrid{},
          py::arg("n_sources") = std::optional<int>{});

    m.def(
        "music_spectrum",
        [](const CsiTrace& trace, const SmoothingConfig& sc, const AoaGrid& grid,
           std::optional<int> n_sources) {
            const auto cov = multipacket_covariance(trace, sc);
            const auto eig = hermitian_eig(cov, sc.subarray_dim());
            int n = n_sources.value_or(0);
            if (n <= 0) n = estimate_num_sources(std::span(eig.values).first(eig.dim));
            const auto sp = music_spectrum(eig, n, trace.config, sc, grid);
            py::array_t<double> power({static_cast<ssize_t>(sp.theta_deg.size()),
                                       static_cast<ssize_t>(sp.tau.size())});
            auto view = power.mutable_unchecked<2>();
            for (size_t i = 0; i < sp.theta_deg.size(); ++i)
                for (size_t j = 0; j < sp.tau.size(); ++j) view(i, j) = sp.at(i, j);
            return py::make_tuple(py::cast(sp.theta_deg), py::cast(sp.tau), power);
        },
        py::arg("trace"), py::arg("smoothing") = SmoothingConfig{},
        py::arg("grid") = AoaGrid{}, py::arg("n_sources") = std::optional<int>{},
        "Returns (theta_axis_deg, tau_axis_s, power[theta, tau])");

    py::class_<MatchParams>(m, "MatchParams")
        .def(py::init<>())
        .def_readwrite("w_e", &MatchParams::w_e)
        .def_readwrite("w_a", &MatchParams::w_a)
        .def_readwrite("rho_e", &MatchParams::rho_e)
        .def_readwrite("rho_a", &MatchParams::rho_a)
        .def_readwrite("m_c", &MatchParams::m_c)
        .def_readwrite("tau_scale", &MatchParams::tau_scale);

    py::class_<RadioMap>(m, "RadioMap")
        .def_property_readonly("ap_ids", [](const RadioMap& m_) { return m_.ap_ids; })
        .def_property_readonly("n_rps", [](const RadioMap& m_) { return m_.rps.size(); })
        .def_readwrite("params", &RadioMap::params);

    m.def("load_radio_map", &load_radio_map, py::arg("path"));
    m.def(
        "locate",
        [](const RadioMap& map, const std::vector<CsiTrace>& traces,
           std::optional<MatchParams> params) {
            const auto res = locate(map, traces, map.pipeline, params);
            return py::make_tuple(res.location[0], res.location[1]);
        },
        py::arg("map"), py::arg("traces"), py::arg("params") = std::optional<MatchParams>{},
        "Returns the (x, y) estimate");

    m.def("entropy_distance", &entropy_distance);
    m.def("aoa_distance", &aoa_distance, py::arg("a"), py::arg("b"),
          py::arg("tau_scale") = 1e9);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) { return run_cli(args); },
        py::arg("args"), "Invoke the command-line interface in-process");

    m.attr("__version__") = std::string(kToolVersion);
}
