#include "csiloc/json_io.hpp"

#include <fstream>

#include "csiloc/errors.hpp"
#include "csiloc/trace_io.hpp"

namespace csiloc {

uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), Errc::invalid_input, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a64(bytes);
}

std::string hash_hex(uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json to_json(const Provenance& p) {
    json j;
    j["tool_version"] = p.tool_version;
    j["inputs"] = json::object();
    for (const auto& [k, v] : p.input_hashes) j["inputs"][k] = v;
    j["config_hash"] = p.config_hash;
    j["seed"] = p.seed;
    return j;
}

namespace {

template <typename T>
T get_field(const json& j, const char* key) {
    require(j.contains(key), Errc::data_format, std::string("missing field: ") + key);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(Errc::data_format, std::string("bad field ") + key + ": " + e.what());
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return get_field<T>(j, key);
}

} // namespace

json to_json(const RadioConfig& c) {
    return json{{"n_rx", c.n_rx},        {"n_tx", c.n_tx}, {"n_sub", c.n_sub},
                {"f_c", c.f_c},          {"f_delta", c.f_delta},
                {"antenna_spacing", c.d}};
}

RadioConfig radio_config_from_json(const json& j) {
    RadioConfig c;
    c.n_rx = get_or(j, "n_rx", c.n_rx);
    c.n_tx = get_or(j, "n_tx", c.n_tx);
    c.n_sub = get_or(j, "n_sub", c.n_sub);
    c.f_c = get_or(j, "f_c", c.f_c);
    c.f_delta = get_or(j, "f_delta", c.f_delta);
    c.d = get_or(j, "antenna_spacing", c.c / c.f_c / 2.0);
    c.validate();
    return c;
}

json to_json(const PrepConfig& c) {
    return json{{"remove_sto", c.remove_sto},
                {"remove_sfo", c.remove_sfo},
                {"cfo_window", c.cfo_window},
                {"tap_filtering", c.tap_filtering},
                {"tap_keep_fraction", c.tap_keep_fraction}};
}

PrepConfig prep_config_from_json(const json& j) {
    PrepConfig c;
    c.remove_sto = get_or(j, "remove_sto", c.remove_sto);
    c.remove_sfo = get_or(j, "remove_sfo", c.remove_sfo);
    c.cfo_window = get_or(j, "cfo_window", c.cfo_window);
    c.tap_filtering = get_or(j, "tap_filtering", c.tap_filtering);
    c.tap_keep_fraction = get_or(j, "tap_keep_fraction", c.tap_keep_fraction);
    return c;
}

json to_json(const EntropyConfig& c) {
    return json{{"n_packets", c.n_packets},
                {"p_max", c.p_max},
                {"grid_size", c.grid_size},
                {"criterion", c.criterion == OrderCriterion::eef ? "eef" : "aic"}};
}

EntropyConfig entropy_config_from_json(const json& j) {
    EntropyConfig c;
    c.n_packets = get_or(j, "n_packets", c.n_packets);
    c.p_max = get_or(j, "p_max", c.p_max);
    c.grid_size = get_or(j, "grid_size", c.grid_size);
    const std::string crit = get_or<std::string>(j, "criterion", "eef");
    if (crit == "eef")
        c.criterion = OrderCriterion::eef;
    else if (crit == "aic")
        c.criterion = OrderCriterion::aic;
    else
        fail(Errc::data_format, "unknown order criterion: " + crit);
    return c;
}

json to_json(const SmoothingConfig& c) {
    json j{{"k_prime", c.k_prime},
           {"n_rx_sub", c.n_rx_sub},
           {"forward_backward", c.forward_backward},
           {"n_packets", c.n_packets}};
    if (c.null_subcarrier) j["null_subcarrier"] = *c.null_subcarrier;
    return j;
}

SmoothingConfig smoothing_config_from_json(const json& j) {
    SmoothingConfig c;
    c.k_prime = get_or(j, "k_prime", c.k_prime);
    c.n_rx_sub = get_or(j, "n_rx_sub", c.n_rx_sub);
    c.forward_backward = get_or(j, "forward_backward", c.forward_backward);
    c.n_packets = get_or(j, "n_packets", c.n_packets);
    if (j.contains("null_subcarrier") && !j.at("null_subcarrier").is_null())
        c.null_subcarrier = get_field<int>(j, "null_subcarrier");
    return c;
}

json to_json(const AoaGrid& g) {
    return json{{"theta_min_deg", g.theta_min_deg}, {"theta_max_deg", g.theta_max_deg},
                {"theta_step_deg", g.theta_step_deg}, {"tau_min", g.tau_min},
                {"tau_max", g.tau_max},             {"tau_step", g.tau_step}};
}

AoaGrid aoa_grid_from_json(const json& j) {
    AoaGrid g;
    g.theta_min_deg = get_or(j, "theta_min_deg", g.theta_min_deg);
    g.theta_max_deg = get_or(j, "theta_max_deg", g.theta_max_deg);
    g.theta_step_deg = get_or(j, "theta_step_deg", g.theta_step_deg);
    g.tau_min = get_or(j, "tau_min", g.tau_min);
    g.tau_max = get_or(j, "tau_max", g.tau_max);
    g.tau_step = get_or(j, "tau_step", g.tau_step);
    return g;
}

json to_json(const PipelineConfig& c) {
    return json{{"prep", to_json(c.prep)},
                {"entropy", to_json(c.entropy)},
                {"smoothing", to_json(c.smoothing)},
                {"grid", to_json(c.grid)}};
}

PipelineConfig pipeline_config_from_json(const json& j) {
    PipelineConfig c;
    if (j.contains("prep")) c.prep = prep_config_from_json(j.at("prep"));
    if (j.contains("entropy")) c.entropy = entropy_config_from_json(j.at("entropy"));
    if (j.contains("smoothing")) c.smoothing = smoothing_config_from_json(j.at("smoothing"));
    if (j.contains("grid")) c.grid = aoa_grid_from_json(j.at("grid"));
    return c;
}

json to_json(const MatchParams& p) {
    return json{{"w_e", p.w_e},     {"w_a", p.w_a}, {"rho_e", p.rho_e},
                {"rho_a", p.rho_a}, {"m_c", p.m_c}, {"tau_scale", p.tau_scale}};
}

MatchParams match_params_from_json(const json& j) {
    MatchParams p;
    p.w_e = get_or(j, "w_e", p.w_e);
    p.w_a = get_or(j, "w_a", p.w_a);
    p.rho_e = get_or(j, "rho_e", p.rho_e);
    p.rho_a = get_or(j, "rho_a", p.rho_a);
    p.m_c = get_or(j, "m_c", p.m_c);
    p.tau_scale = get_or(j, "tau_scale", p.tau_scale);
    p.validate();
    return p;
}

json to_json(const RoomSpec& r) {
    json txs = json::array();
    for (const auto& t : r.tx_positions) txs.push_back(json::array({t[0], t[1]}));
    return json{{"width", r.width},
                {"height", r.height},
                {"tx_positions", txs},
                {"wall_loss_db", r.wall_loss_db},
                {"array_orientation_deg", r.array_orientation_deg}};
}

RoomSpec room_spec_from_json(const json& j) {
    RoomSpec r;
    r.width = get_field<double>(j, "width");
    r.height = get_field<double>(j, "height");
    require(j.contains("tx_positions") && j.at("tx_positions").is_array(), Errc::data_format,
            "missing field: tx_positions");
    for (const auto& t : j.at("tx_positions")) {
        require(t.is_array() && t.size() == 2, Errc::data_format,
                "tx_positions entries must be [x, y]");
        r.tx_positions.push_back({t[0].get<double>(), t[1].get<double>()});
    }
    r.wall_loss_db = get_or(j, "wall_loss_db", r.wall_loss_db);
    r.array_orientation_deg = get_or(j, "array_orientation_deg", r.array_orientation_deg);
    r.validate();
    return r;
}

json to_json(const ImpairmentSpec& s) {
    json j{{"sfo", s.sfo},
           {"sto_taps", s.sto_taps},
           {"cfo_step", s.cfo_step},
           {"cpo", s.cpo},
           {"cfo_jitter", s.cfo_jitter}};
    if (s.snr_db) j["snr_db"] = *s.snr_db;
    return j;
}

ImpairmentSpec impairment_spec_from_json(const json& j) {
    ImpairmentSpec s;
    s.sfo = get_or(j, "sfo", s.sfo);
    s.sto_taps = get_or(j, "sto_taps", s.sto_taps);
    s.cfo_step = get_or(j, "cfo_step", s.cfo_step);
    s.cpo = get_or(j, "cpo", s.cpo);
    s.cfo_jitter = get_or(j, "cfo_jitter", s.cfo_jitter);
    if (j.contains("snr_db") && !j.at("snr_db").is_null())
        s.snr_db = get_field<double>(j, "snr_db");
    return s;
}

json to_json(const EntropyFingerprint& f) {
    json streams = json::array();
    for (const auto& s : f.streams)
        streams.push_back(json{{"tx", s.tx}, {"rx", s.rx}, {"subcarrier", s.subcarrier}});
    return json{{"values", f.values},
                {"streams", streams},
                {"degenerate", f.degenerate},
                {"orders", f.orders},
                {"sigma2", f.sigma2}};
}

EntropyFingerprint entropy_fingerprint_from_json(const json& j) {
    EntropyFingerprint f;
    f.values = get_field<std::vector<double>>(j, "values");
    if (j.contains("streams"))
        for (const auto& s : j.at("streams"))
            f.streams.push_back({get_field<int>(s, "tx"), get_field<int>(s, "rx"),
                                 get_field<int>(s, "subcarrier")});
    f.degenerate = get_or(j, "degenerate", std::vector<uint8_t>(f.values.size(), 0));
    f.orders = get_or(j, "orders", std::vector<int>{});
    f.sigma2 = get_or(j, "sigma2", std::vector<double>{});
    require(f.streams.empty() || f.streams.size() == f.values.size(), Errc::data_format,
            "entropy fingerprint stream/value length mismatch");
    return f;
}

json to_json(const AoaTofFingerprint& f) {
    return json{{"theta_deg", f.theta_deg},
                {"tau", f.tau},
                {"peak_power", f.peak_power},
                {"n_sources", f.n_sources}};
}

AoaTofFingerprint aoa_fingerprint_from_json(const json& j) {
    AoaTofFingerprint f;
    f.theta_deg = get_field<double>(j, "theta_deg");
    f.tau = get_field<double>(j, "tau");
    f.peak_power = get_or(j, "peak_power", 0.0);
    f.n_sources = get_or(j, "n_sources", 0);
    return f;
}

json to_json(const RadioMap& m) {
    json rps = json::array();
    for (const auto& rp : m.rps) {
        json ent = json::array(), aoa = json::array();
        for (const auto& e : rp.entropy) ent.push_back(to_json(e));
        for (const auto& a : rp.aoa) aoa.push_back(to_json(a));
        rps.push_back(json{{"id", rp.id},
                           {"location", json::array({rp.location[0], rp.location[1]})},
                           {"entropy", ent},
                           {"aoa", aoa}});
    }
    return json{{"format_version", m.format_version},
                {"radio", to_json(m.radio)},
                {"ap_ids", m.ap_ids},
                {"rps", rps},
                {"params", to_json(m.params)},
                {"pipeline", to_json(m.pipeline)}};
}

RadioMap radio_map_from_json(const json& j) {
    RadioMap m;
    m.format_version = get_field<int>(j, "format_version");
    require(m.format_version == 1, Errc::data_format, "unsupported radio map format version");
    m.radio = radio_config_from_json(j.at("radio"));
    m.ap_ids = get_field<std::vector<std::string>>(j, "ap_ids");
    require(j.contains("rps") && j.at("rps").is_array(), Errc::data_format,
            "missing field: rps");
    for (const auto& r : j.at("rps")) {
        RpEntry e;
        e.id = get_field<int>(r, "id");
        const auto loc = get_field<std::vector<double>>(r, "location");
        require(loc.size() == 2, Errc::data_format, "location must be [x, y]");
        e.location = {loc[0], loc[1]};
        for (const auto& f : r.at("entropy")) e.entropy.push_back(entropy_fingerprint_from_json(f));
        for (const auto& f : r.at("aoa")) e.aoa.push_back(aoa_fingerprint_from_json(f));
        m.rps.push_back(std::move(e));
    }
    if (j.contains("params")) m.params = match_params_from_json(j.at("params"));
    if (j.contains("pipeline")) m.pipeline = pipeline_config_from_json(j.at("pipeline"));
    m.validate();
    return m;
}

json to_json(const LocateResult& r) {
    json cands = json::array();
    for (const auto& c : r.candidates)
        cands.push_back(json{{"rp_id", c.rp_id},
                             {"entropy_dist", c.entropy_dist},
                             {"aoa_dist", c.aoa_dist},
                             {"kernel", c.kernel}});
    return json{{"estimate", json::array({r.location[0], r.location[1]})},
                {"candidates", cands}};
}

json to_json(const CalibrationReport& r) {
    return json{{"sto_taps", r.sto_taps},
                {"sfo_estimate", r.sfo_estimate},
                {"cfo_window", r.cfo_window},
                {"packets_in", r.packets_in},
                {"packets_out", r.packets_out},
                {"degenerate_entries", r.degenerate_entries},
                {"min_kept_taps", r.min_kept_taps}};
}

json to_json(const EvalReport& r) {
    json cdf = json::array();
    for (const auto& p : r.cdf) cdf.push_back(json::array({p[0], p[1]}));
    return json{{"errors", r.errors},
                {"mean_error", r.mean_error},
                {"median_error", r.median_error},
                {"p90_error", r.p90_error},
                {"min_error", r.min_error},
                {"max_error", r.max_error},
                {"cdf", cdf}};
}

json parse_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), Errc::invalid_input, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(Errc::data_format, "invalid JSON in " + path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
    write_file_atomic(path, doc.dump(2) + "\n");
}

void save_radio_map(const std::filesystem::path& path, const RadioMap& map,
                    const Provenance& prov) {
    json j = to_json(map);
    j["provenance"] = to_json(prov);
    write_json_file(path, j);
}

RadioMap load_radio_map(const std::filesystem::path& path) {
    return radio_map_from_json(parse_json_file(path));
}

} // namespace csiloc
