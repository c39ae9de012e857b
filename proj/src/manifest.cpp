#include "hidim/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "hidim/csv.hpp"
#include "hidim/errors.hpp"

namespace hidim::io {

namespace {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

}  // namespace

void write_manifest(const RunManifest& manifest, const std::string& path) {
    nlohmann::json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["command"] = manifest.command;
    j["timestamp_utc"] = utc_timestamp();
    j["config_hash"] = manifest.config_hash;
    nlohmann::json seeds = nlohmann::json::object();
    for (const auto& [name, value] : manifest.seeds) seeds[name] = value;
    j["seeds"] = seeds;
    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& file : manifest.input_files)
        inputs.push_back({{"path", file}, {"hash", hash_file(file)}});
    j["inputs"] = inputs;
    j["outputs"] = manifest.output_files;

    std::ofstream out(path);
    if (!out) throw schema_error("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) throw schema_error("write failed for '" + path + "'");
}

}  // namespace hidim::io
