#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hidim::io {

inline constexpr const char* kToolName = "hidim";
inline constexpr const char* kToolVersion = "0.1.0";

/// Record of one CLI invocation: what was read, what was written, under
/// which seeds and configuration. Rerunning a command with the seeds and
/// config recorded here reproduces its design/screening outputs bit for bit.
struct RunManifest {
    std::string command;
    std::string config_hash;
    std::vector<std::pair<std::string, std::uint64_t>> seeds;
    std::vector<std::string> input_files;   // paths with content hashes recorded
    std::vector<std::string> output_files;
};

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace hidim::io
