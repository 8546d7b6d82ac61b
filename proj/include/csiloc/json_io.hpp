#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "csiloc/locator.hpp"
#include "csiloc/sim.hpp"

namespace csiloc {

using json = nlohmann::ordered_json;

inline constexpr std::string_view kToolVersion = "0.1.0";

uint64_t fnv1a64(std::string_view bytes);
uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string hash_hex(uint64_t h);

// Reproducibility block attached to every emitted document.
struct Provenance {
    std::string tool_version{kToolVersion};
    std::map<std::string, std::string> input_hashes;  // path/label -> fnv1a hex
    std::string config_hash;
    uint64_t seed = 0;
};

json to_json(const Provenance& p);

// Radio and pipeline configuration.
json to_json(const RadioConfig& c);
RadioConfig radio_config_from_json(const json& j);

json to_json(const PrepConfig& c);
PrepConfig prep_config_from_json(const json& j);

json to_json(const EntropyConfig& c);
EntropyConfig entropy_config_from_json(const json& j);

json to_json(const SmoothingConfig& c);
SmoothingConfig smoothing_config_from_json(const json& j);

json to_json(const AoaGrid& g);
AoaGrid aoa_grid_from_json(const json& j);

json to_json(const PipelineConfig& c);
PipelineConfig pipeline_config_from_json(const json& j);

json to_json(const MatchParams& p);
MatchParams match_params_from_json(const json& j);

// Scene descriptions for the simulator.
json to_json(const RoomSpec& r);
RoomSpec room_spec_from_json(const json& j);

json to_json(const ImpairmentSpec& s);
ImpairmentSpec impairment_spec_from_json(const json& j);

// Fingerprints and the radio map.
json to_json(const EntropyFingerprint& f);
EntropyFingerprint entropy_fingerprint_from_json(const json& j);

json to_json(const AoaTofFingerprint& f);
AoaTofFingerprint aoa_fingerprint_from_json(const json& j);

json to_json(const RadioMap& m);
RadioMap radio_map_from_json(const json& j);

json to_json(const LocateResult& r);
json to_json(const CalibrationReport& r);
json to_json(const EvalReport& r);

// Generic helpers: parse with data-format errors naming the source, and
// atomic write (temp file + rename) of a document with trailing newline.
json parse_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& doc);

void save_radio_map(const std::filesystem::path& path, const RadioMap& map,
                    const Provenance& prov);
RadioMap load_radio_map(const std::filesystem::path& path);

} // namespace csiloc
