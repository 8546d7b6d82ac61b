#include "csiloc/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "csiloc/errors.hpp"
#include "csiloc/json_io.hpp"
#include "csiloc/intel5300.hpp"
#include "csiloc/rng.hpp"
#include "csiloc/locator.hpp"
#include "csiloc/sim.hpp"
#include "csiloc/study.hpp"
#include "csiloc/trace_io.hpp"

namespace csiloc {

namespace fs = std::filesystem;

namespace {

// Values shared by every subcommand; the config file fills anything the
// flags leave untouched (flag > config file > default).
struct GlobalOpts {
    std::string config_path;
    uint64_t seed = 1;
    json config;  // parsed --config document (empty object if absent)

    void load() {
        if (!config_path.empty())
            config = parse_json_file(config_path);
        else
            config = json::object();
    }

    RadioConfig radio() const {
        return config.contains("radio") ? radio_config_from_json(config.at("radio"))
                                        : RadioConfig{};
    }

    PipelineConfig pipeline() const { return pipeline_config_from_json(config); }

    ImpairmentSpec impairments() const {
        return config.contains("impairments")
                   ? impairment_spec_from_json(config.at("impairments"))
                   : ImpairmentSpec{};
    }

    std::string config_hash() const { return hash_hex(fnv1a64(config.dump())); }

    Provenance provenance() const {
        Provenance p;
        p.seed = seed;
        p.config_hash = config_hash();
        if (!config_path.empty())
            p.input_hashes[config_path] = hash_hex(fnv1a64_file(config_path));
        return p;
    }
};

uint64_t link_seed(uint64_t base, int point_index, int ap) {
    return rp_seed(base, point_index) + 0x9e3779b97f4a7c15ull * static_cast<uint64_t>(ap);
}

std::string point_file(const char* prefix, int index, int ap) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%03d_ap%d.trace", prefix, index, ap);
    return buf;
}

void write_csv_atomic(const fs::path& path, const std::string& body) {
    write_file_atomic(path, body);
}

// ---- simulate ----------------------------------------------------------

struct SimulateOpts {
    std::string scene_path;
    std::string out_dir;
    int packets = 250;
    double rp_spacing = 1.0;
    int test_points = 0;
    std::optional<double> snr_db;
    std::optional<double> sfo;
    std::optional<int> sto_taps;
    std::optional<double> cfo_step;
    std::optional<double> cpo;
    std::optional<double> cfo_jitter;
};

json truth_json(const std::vector<PathComponent>& paths) {
    const auto& gt = ground_truth(paths);
    return json{{"theta_deg", gt.theta_deg}, {"tau", gt.tau}};
}

int cmd_simulate(const GlobalOpts& g, const SimulateOpts& o, std::ostream& out) {
    const RoomSpec room = room_spec_from_json(parse_json_file(o.scene_path));
    const RadioConfig cfg = g.radio();

    ImpairmentSpec imp = g.impairments();
    if (o.snr_db) imp.snr_db = *o.snr_db;
    if (o.sfo) imp.sfo = *o.sfo;
    if (o.sto_taps) imp.sto_taps = *o.sto_taps;
    if (o.cfo_step) imp.cfo_step = *o.cfo_step;
    if (o.cpo) imp.cpo = *o.cpo;
    if (o.cfo_jitter) imp.cfo_jitter = *o.cfo_jitter;

    const auto scene = make_radio_scene(room, o.rp_spacing, cfg, g.seed);
    const int n_aps = static_cast<int>(room.tx_positions.size());

    fs::create_directories(o.out_dir);
    const fs::path dir(o.out_dir);

    json manifest;
    manifest["format_version"] = 1;
    manifest["radio"] = to_json(cfg);
    manifest["room"] = to_json(room);
    manifest["rp_spacing"] = o.rp_spacing;
    manifest["packets"] = o.packets;
    manifest["impairments"] = to_json(imp);
    json ap_ids = json::array();
    for (int a = 0; a < n_aps; ++a) ap_ids.push_back("ap" + std::to_string(a));
    manifest["ap_ids"] = ap_ids;

    json rps = json::array();
    for (const auto& pt : scene) {
        json files = json::array(), truths = json::array();
        for (int a = 0; a < n_aps; ++a) {
            const auto trace = synth_trace(pt.paths_per_tx[a], cfg, imp, o.packets,
                                           link_seed(g.seed, pt.rp_index, a));
            const std::string name = point_file("rp", pt.rp_index, a);
            save_trace(trace, dir / name);
            files.push_back(name);
            truths.push_back(truth_json(pt.paths_per_tx[a]));
        }
        rps.push_back(json{{"id", pt.rp_index},
                           {"location", json::array({pt.location[0], pt.location[1]})},
                           {"traces", files},
                           {"truth", truths}});
    }
    manifest["rps"] = rps;

    json tps = json::array();
    if (o.test_points > 0) {
        Rng pos_rng(g.seed ^ 0x7e57a11dull);
        const double margin = std::min({0.5, room.width / 4.0, room.height / 4.0});
        for (int i = 0; i < o.test_points; ++i) {
            const std::array<double, 2> loc = {
                margin + pos_rng.uniform() * (room.width - 2.0 * margin),
                margin + pos_rng.uniform() * (room.height - 2.0 * margin)};
            json files = json::array(), truths = json::array();
            for (int a = 0; a < n_aps; ++a) {
                const auto paths = paths_for_link(room, room.tx_positions[a], loc, cfg);
                const auto trace = synth_trace(paths, cfg, imp, o.packets,
                                               link_seed(g.seed ^ 0x7e57ull, i, a));
                const std::string name = point_file("tp", i, a);
                save_trace(trace, dir / name);
                files.push_back(name);
                truths.push_back(truth_json(paths));
            }
            tps.push_back(json{{"id", i},
                               {"location", json::array({loc[0], loc[1]})},
                               {"traces", files},
                               {"truth", truths}});
        }
    }
    manifest["test_points"] = tps;

    Provenance prov = g.provenance();
    prov.input_hashes[o.scene_path] = hash_hex(fnv1a64_file(o.scene_path));
    manifest["provenance"] = to_json(prov);
    write_json_file(dir / "manifest.json", manifest);

    out << "wrote " << scene.size() << " reference points, " << o.test_points
        << " test points (" << n_aps << " access points) to " << o.out_dir << "\n";
    return 0;
}

// ---- ingest ------------------------------------------------------------

int cmd_ingest(const GlobalOpts& g, const std::string& input, const std::string& out_path,
               std::ostream& out) {
    const auto records = parse_intel5300_file(input);
    const auto trace = intel5300_to_trace(records, g.radio());
    save_trace(trace, out_path);
    out << "ingested " << trace.packets.size() << " packets ("
        << trace.config.n_rx << " rx, " << trace.config.n_tx << " tx, "
        << trace.config.n_sub << " subcarriers) to " << out_path << "\n";
    return 0;
}

// ---- manifest helpers --------------------------------------------------

struct ManifestPoint {
    int id = 0;
    std::array<double, 2> location{0.0, 0.0};
    std::vector<std::string> traces;
};

std::vector<ManifestPoint> manifest_points(const json& manifest, const char* key) {
    require(manifest.contains(key), Errc::data_format,
            std::string("manifest missing field: ") + key);
    std::vector<ManifestPoint> out;
    for (const auto& p : manifest.at(key)) {
        ManifestPoint mp;
        mp.id = p.at("id").get<int>();
        const auto loc = p.at("location").get<std::vector<double>>();
        require(loc.size() == 2, Errc::data_format, "manifest location must be [x, y]");
        mp.location = {loc[0], loc[1]};
        mp.traces = p.at("traces").get<std::vector<std::string>>();
        out.push_back(std::move(mp));
    }
    return out;
}

std::vector<CsiTrace> load_point_traces(const fs::path& base_dir, const ManifestPoint& pt) {
    std::vector<CsiTrace> traces;
    for (const auto& rel : pt.traces) traces.push_back(load_trace(base_dir / rel));
    return traces;
}

// ---- build-map ---------------------------------------------------------

std::string entropy_csv(const EntropyFingerprint& fp) {
    std::ostringstream os;
    os << "stream,tx,rx,subcarrier,order,sigma2,entropy\n";
    for (size_t i = 0; i < fp.values.size(); ++i) {
        const auto& s = fp.streams[i];
        os << i << ',' << s.tx << ',' << s.rx << ',' << s.subcarrier << ','
           << fp.orders[i] << ',' << fp.sigma2[i] << ',' << fp.values[i] << "\n";
    }
    return os.str();
}

int cmd_build_map(const GlobalOpts& g, const std::string& manifest_path,
                  const std::string& out_path, const std::string& entropy_csv_dir,
                  std::ostream& out) {
    const json manifest = parse_json_file(manifest_path);
    const fs::path base = fs::path(manifest_path).parent_path();
    const auto ap_ids = manifest.at("ap_ids").get<std::vector<std::string>>();
    const PipelineConfig cfg = g.pipeline();

    std::vector<Survey> surveys;
    for (const auto& pt : manifest_points(manifest, "rps")) {
        Survey s;
        s.rp_id = pt.id;
        s.location = pt.location;
        s.per_ap = load_point_traces(base, pt);
        surveys.push_back(std::move(s));
    }

    RadioMap map = build_radio_map(surveys, ap_ids, cfg);
    if (g.config.contains("params")) map.params = match_params_from_json(g.config.at("params"));

    Provenance prov = g.provenance();
    prov.input_hashes[manifest_path] = hash_hex(fnv1a64_file(manifest_path));
    save_radio_map(out_path, map, prov);

    if (!entropy_csv_dir.empty()) {
        fs::create_directories(entropy_csv_dir);
        for (const auto& rp : map.rps)
            for (size_t a = 0; a < rp.entropy.size(); ++a) {
                char name[64];
                std::snprintf(name, sizeof name, "rp_%03d_%s_entropy.csv", rp.id,
                              map.ap_ids[a].c_str());
                write_csv_atomic(fs::path(entropy_csv_dir) / name, entropy_csv(rp.entropy[a]));
            }
    }

    out << "built map with " << map.rps.size() << " reference points x "
        << map.ap_ids.size() << " access points to " << out_path << "\n";
    return 0;
}

// ---- tune --------------------------------------------------------------

int cmd_tune(const GlobalOpts& g, const std::string& manifest_path,
             const std::string& out_path, double tau_scale, int m_c_max, std::ostream& out) {
    const json manifest = parse_json_file(manifest_path);
    const fs::path base = fs::path(manifest_path).parent_path();
    const PipelineConfig cfg = g.pipeline();

    std::vector<Survey> surveys;
    for (const auto& pt : manifest_points(manifest, "rps")) {
        Survey s;
        s.rp_id = pt.id;
        s.location = pt.location;
        s.per_ap = load_point_traces(base, pt);
        surveys.push_back(std::move(s));
    }

    const auto samples = make_tuning_samples(surveys, cfg);
    TuneGrid grid = TuneGrid::defaults();
    grid.m_c_max = m_c_max;
    const MatchParams params = loocv_tune(samples, tau_scale, grid);

    json doc;
    doc["format_version"] = 1;
    doc["params"] = to_json(params);
    Provenance prov = g.provenance();
    prov.input_hashes[manifest_path] = hash_hex(fnv1a64_file(manifest_path));
    doc["provenance"] = to_json(prov);
    write_json_file(out_path, doc);

    out << "tuned params: w_e=" << params.w_e << " w_a=" << params.w_a
        << " rho_e=" << params.rho_e << " rho_a=" << params.rho_a << " m_c=" << params.m_c
        << " -> " << out_path << "\n";
    return 0;
}

// ---- locate / evaluate -------------------------------------------------

struct ParamOverrides {
    std::string params_path;  // MatchParams JSON emitted by tune
    std::optional<double> w_a;
    std::optional<double> rho_e;
    std::optional<double> rho_a;
    std::optional<int> m_c;
    std::optional<double> tau_scale;

    // flag > params file > map default
    MatchParams resolve(const MatchParams& map_default) const {
        MatchParams p = map_default;
        if (!params_path.empty()) {
            const json doc = parse_json_file(params_path);
            p = match_params_from_json(doc.contains("params") ? doc.at("params") : doc);
        }
        if (w_a) {
            p.w_a = *w_a;
            p.w_e = 1.0 - *w_a;
        }
        if (rho_e) p.rho_e = *rho_e;
        if (rho_a) p.rho_a = *rho_a;
        if (m_c) p.m_c = *m_c;
        if (tau_scale) p.tau_scale = *tau_scale;
        p.validate();
        return p;
    }
};

int cmd_locate(const GlobalOpts& g, const std::string& map_path,
               const std::vector<std::string>& trace_paths, const ParamOverrides& po,
               const std::string& out_path, std::ostream& out) {
    const RadioMap map = load_radio_map(map_path);
    std::vector<CsiTrace> traces;
    for (const auto& p : trace_paths) traces.push_back(load_trace(p));

    const MatchParams params = po.resolve(map.params);
    const auto res = locate(map, traces, map.pipeline, params);

    json doc = to_json(res);
    doc["params"] = to_json(params);
    Provenance prov = g.provenance();
    prov.input_hashes[map_path] = hash_hex(fnv1a64_file(map_path));
    for (const auto& p : trace_paths) prov.input_hashes[p] = hash_hex(fnv1a64_file(p));
    doc["provenance"] = to_json(prov);

    if (!out_path.empty())
        write_json_file(out_path, doc);
    else
        out << doc.dump(2) << "\n";
    out << "estimate: (" << res.location[0] << ", " << res.location[1] << ")\n";
    return 0;
}

int cmd_evaluate(const GlobalOpts& g, const std::string& map_path,
                 const std::string& manifest_path, const ParamOverrides& po,
                 const std::string& out_path, std::string cdf_csv_path, std::ostream& out) {
    const RadioMap map = load_radio_map(map_path);
    const json manifest = parse_json_file(manifest_path);
    const fs::path base = fs::path(manifest_path).parent_path();
    const MatchParams params = po.resolve(map.params);

    const auto points = manifest_points(manifest, "test_points");
    require(!points.empty(), Errc::invalid_input, "manifest has no test points");

    std::vector<double> errors;
    json per_point = json::array();
    for (const auto& pt : points) {
        const auto traces = load_point_traces(base, pt);
        const auto res = locate(map, traces, map.pipeline, params);
        const double dx = res.location[0] - pt.location[0];
        const double dy = res.location[1] - pt.location[1];
        const double err = std::hypot(dx, dy);
        errors.push_back(err);
        per_point.push_back(json{{"id", pt.id},
                                 {"truth", json::array({pt.location[0], pt.location[1]})},
                                 {"estimate", json::array({res.location[0], res.location[1]})},
                                 {"error", err}});
    }

    const EvalReport report = make_eval_report(errors);
    json doc = to_json(report);
    doc["points"] = per_point;
    doc["params"] = to_json(params);
    Provenance prov = g.provenance();
    prov.input_hashes[map_path] = hash_hex(fnv1a64_file(map_path));
    prov.input_hashes[manifest_path] = hash_hex(fnv1a64_file(manifest_path));
    doc["provenance"] = to_json(prov);
    write_json_file(out_path, doc);

    if (cdf_csv_path.empty())
        cdf_csv_path = (fs::path(out_path).parent_path() /
                        (fs::path(out_path).stem().string() + "_cdf.csv"))
                           .string();
    std::ostringstream csv;
    csv << "error_m,cum_fraction\n";
    for (const auto& p : report.cdf) csv << p[0] << ',' << p[1] << "\n";
    write_csv_atomic(cdf_csv_path, csv.str());

    out << "mean error " << report.mean_error << " m over " << errors.size()
        << " test points (p90 " << report.p90_error << ", max " << report.max_error
        << ") -> " << out_path << "\n";
    return 0;
}

// ---- study -------------------------------------------------------------

int cmd_study(const GlobalOpts& g, const std::string& kind, const std::string& out_path,
              int n_seeds, std::optional<double> snr_db, std::ostream& out) {
    const RadioConfig cfg = g.radio();
    std::ostringstream csv;
    if (kind == "entropy-packets") {
        const std::vector<int> counts = {10, 20, 50, 100, 200, 500, 1000, 2000, 5000};
        const auto rows = entropy_packets_study(counts, n_seeds > 0 ? n_seeds : 24, g.seed,
                                                snr_db.value_or(15.0), cfg);
        csv << "n_packets,median_std,max_std\n";
        for (const auto& r : rows)
            csv << r.n_packets << ',' << r.median_std << ',' << r.max_std << "\n";
    } else if (kind == "aoa-packets") {
        const std::vector<int> counts = {5, 10, 15, 40};
        const auto rows = aoa_packets_study(counts, n_seeds > 0 ? n_seeds : 100, g.seed,
                                            snr_db.value_or(15.0), cfg);
        csv << "n_packets,mean_abs_error_deg\n";
        for (const auto& r : rows) csv << r.n_packets << ',' << r.mean_abs_error_deg << "\n";
    } else if (kind == "smoothing-sweep") {
        const std::vector<int> lengths = {8, 12, 16, 20, 24, 30};
        const auto rows = smoothing_sweep_study(lengths, n_seeds > 0 ? n_seeds : 20, g.seed,
                                                snr_db.value_or(20.0), cfg);
        csv << "length,feasible,n_seeds,seeds_with_true_peak,median_sharpness_db\n";
        for (const auto& r : rows)
            csv << r.length << ',' << (r.feasible ? 1 : 0) << ',' << r.n_seeds << ','
                << r.seeds_with_true_peak << ',' << r.median_sharpness_db << "\n";
    } else {
        fail(Errc::invalid_config, "unknown study kind: " + kind);
    }
    write_csv_atomic(out_path, csv.str());
    out << "study " << kind << " -> " << out_path << "\n";
    return 0;
}

// ---- aoa-spectrum ------------------------------------------------------

int cmd_aoa_spectrum(const GlobalOpts& g, const std::string& trace_path,
                     const std::string& out_path, bool prep, std::optional<int> n_sources,
                     std::ostream& out) {
    CsiTrace trace = load_trace(trace_path);
    require(!trace.packets.empty(), Errc::invalid_input, "trace has no packets");
    const PipelineConfig cfg = g.pipeline();
    if (prep) {
        // Same prep the phase branch of the pipeline uses: calibrated but
        // never tap-filtered, so the delay structure survives.
        PrepConfig pc = cfg.prep;
        pc.tap_filtering = false;
        trace = calibrate(trace, pc).trace;
    }

    SmoothingConfig sc = cfg.smoothing;
    sc.n_packets = std::min<int>(sc.n_packets, static_cast<int>(trace.packets.size()));
    const auto cov = multipacket_covariance(trace, sc);
    const auto eig = hermitian_eig(cov, sc.subarray_dim());
    int n_src = n_sources.value_or(0);
    if (n_src <= 0)
        n_src = estimate_num_sources(std::span(eig.values).first(eig.dim));
    const auto spectrum = music_spectrum(eig, n_src, trace.config, sc, cfg.grid);

    std::ostringstream csv;
    csv << "theta_deg,tau_ns,power_db\n";
    for (size_t it = 0; it < spectrum.theta_deg.size(); ++it)
        for (size_t iu = 0; iu < spectrum.tau.size(); ++iu)
            csv << spectrum.theta_deg[it] << ',' << spectrum.tau[iu] * 1e9 << ','
                << 10.0 * std::log10(spectrum.at(it, iu)) << "\n";
    write_csv_atomic(out_path, csv.str());
    out << "spectrum " << spectrum.theta_deg.size() << " x " << spectrum.tau.size()
        << " (sources: " << n_src << ") -> " << out_path << "\n";
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"CSI fingerprint localization toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON config file");
    app.add_option("--seed", g.seed, "random seed");

    SimulateOpts sim;
    auto* c_sim = app.add_subcommand("simulate", "synthesize survey and test traces");
    c_sim->add_option("scene", sim.scene_path, "scene JSON (room layout)")->required();
    c_sim->add_option("--out", sim.out_dir, "output directory")->required();
    c_sim->add_option("--packets", sim.packets, "packets per trace");
    c_sim->add_option("--rp-spacing", sim.rp_spacing, "reference grid spacing (m)");
    c_sim->add_option("--test-points", sim.test_points, "held-out test point count");
    c_sim->add_option("--snr-db", sim.snr_db, "noise level");
    c_sim->add_option("--sfo", sim.sfo, "sampling offset (s)");
    c_sim->add_option("--sto-taps", sim.sto_taps, "timing offset (taps)");
    c_sim->add_option("--cfo-step", sim.cfo_step, "per-packet phase step (rad)");
    c_sim->add_option("--cpo", sim.cpo, "initial carrier phase (rad)");
    c_sim->add_option("--cfo-jitter", sim.cfo_jitter, "white phase jitter std (rad)");

    std::string in_path, out_path;
    auto* c_ing = app.add_subcommand("ingest", "convert a receiver dump to a trace");
    c_ing->add_option("input", in_path, "raw capture file")->required();
    c_ing->add_option("--out", out_path, "output trace path")->required();

    std::string manifest_path, map_path, entropy_dir;
    auto* c_map = app.add_subcommand("build-map", "fingerprint survey traces into a map");
    c_map->add_option("--manifest", manifest_path, "survey manifest JSON")->required();
    c_map->add_option("--out", map_path, "output map JSON")->required();
    c_map->add_option("--entropy-csv-dir", entropy_dir, "dump per-stream diagnostics here");

    std::string tune_manifest, tune_out;
    double tune_tau_scale = 1e9;
    int tune_mc_max = TuneGrid{}.m_c_max;
    auto* c_tune = app.add_subcommand("tune", "grid-search matching parameters");
    c_tune->add_option("--manifest", tune_manifest, "survey manifest JSON")->required();
    c_tune->add_option("--out", tune_out, "output params JSON")->required();
    c_tune->add_option("--tau-scale", tune_tau_scale, "delay scaling (per second)");
    c_tune->add_option("--m-c-max", tune_mc_max, "largest candidate count tried");

    std::string loc_map, loc_out;
    std::vector<std::string> loc_traces;
    ParamOverrides po;
    auto* c_loc = app.add_subcommand("locate", "estimate a position from online traces");
    c_loc->add_option("--map", loc_map, "radio map JSON")->required();
    c_loc->add_option("--trace", loc_traces, "one trace per access point, in map order")
        ->required();
    c_loc->add_option("--params", po.params_path, "params JSON from tune");
    c_loc->add_option("--w-a", po.w_a, "angle kernel weight (entropy gets 1 - w_a)");
    c_loc->add_option("--rho-e", po.rho_e, "entropy kernel decay");
    c_loc->add_option("--rho-a", po.rho_a, "angle kernel decay");
    c_loc->add_option("--m-c", po.m_c, "candidate count");
    c_loc->add_option("--tau-scale", po.tau_scale, "delay scaling (per second)");
    c_loc->add_option("--out", loc_out, "output JSON (stdout if omitted)");

    std::string ev_map, ev_manifest, ev_out, ev_csv;
    ParamOverrides ev_po;
    auto* c_ev = app.add_subcommand("evaluate", "batch-localize manifest test points");
    c_ev->add_option("--map", ev_map, "radio map JSON")->required();
    c_ev->add_option("--manifest", ev_manifest, "manifest with test points")->required();
    c_ev->add_option("--params", ev_po.params_path, "params JSON from tune");
    c_ev->add_option("--w-a", ev_po.w_a, "angle kernel weight");
    c_ev->add_option("--rho-e", ev_po.rho_e, "entropy kernel decay");
    c_ev->add_option("--rho-a", ev_po.rho_a, "angle kernel decay");
    c_ev->add_option("--m-c", ev_po.m_c, "candidate count");
    c_ev->add_option("--tau-scale", ev_po.tau_scale, "delay scaling (per second)");
    c_ev->add_option("--out", ev_out, "output report JSON")->required();
    c_ev->add_option("--cdf-csv", ev_csv, "output CDF CSV (derived from --out if omitted)");

    std::string study_kind, study_out;
    int study_seeds = 0;
    std::optional<double> study_snr;
    auto* c_st = app.add_subcommand("study", "run a Monte-Carlo micro-benchmark");
    c_st->add_option("--kind", study_kind, "entropy-packets | aoa-packets | smoothing-sweep")
        ->required();
    c_st->add_option("--out", study_out, "output CSV")->required();
    c_st->add_option("--seeds", study_seeds, "Monte-Carlo repetitions (0 = default)");
    c_st->add_option("--snr-db", study_snr, "noise level");

    std::string sp_trace, sp_out;
    bool sp_prep = false;
    std::optional<int> sp_sources;
    auto* c_sp = app.add_subcommand("aoa-spectrum", "export an angle-delay spectrum");
    c_sp->add_option("trace", sp_trace, "input trace")->required();
    c_sp->add_option("--out", sp_out, "output CSV")->required();
    c_sp->add_flag("--prep", sp_prep, "calibrate the trace first");
    c_sp->add_option("--n-sources", sp_sources, "override the source-count estimate");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        g.load();
        if (c_sim->parsed()) return cmd_simulate(g, sim, out);
        if (c_ing->parsed()) return cmd_ingest(g, in_path, out_path, out);
        if (c_map->parsed()) return cmd_build_map(g, manifest_path, map_path, entropy_dir, out);
        if (c_tune->parsed()) return cmd_tune(g, tune_manifest, tune_out, tune_tau_scale,
                                              tune_mc_max, out);
        if (c_loc->parsed()) return cmd_locate(g, loc_map, loc_traces, po, loc_out, out);
        if (c_ev->parsed())
            return cmd_evaluate(g, ev_map, ev_manifest, ev_po, ev_out, ev_csv, out);
        if (c_st->parsed()) return cmd_study(g, study_kind, study_out, study_seeds, study_snr, out);
        if (c_sp->parsed()) return cmd_aoa_spectrum(g, sp_trace, sp_out, sp_prep, sp_sources, out);
        err << "error: no subcommand\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace csiloc
