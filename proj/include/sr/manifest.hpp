#pragma once

// Run provenance. Every tool invocation drops one manifest next to its
// outputs: what was run, with which effective settings, on which inputs
// (content-addressed), producing which files. Re-running the recorded
// argv must reproduce every listed output byte for byte.

#include <cstdint>
#include <string>
#include <vector>

namespace sr {

inline constexpr const char* kToolVersion = "1.0.0";

struct InputDigest {
    std::string path;
    std::string fnv1a64; // hex digest of the raw bytes
};

struct RunManifest {
    std::string command;            // subcommand name
    std::vector<std::string> argv;  // arguments as received, program name excluded
    std::string resolved_json;      // effective config after defaults, JSON text
    std::uint64_t seed = 0;
    int workers = 0;
    std::vector<InputDigest> inputs;
    std::vector<std::string> outputs; // files written this run, manifest excluded
    std::string started_utc;
    double wall_seconds = 0.0;
};

std::string manifest_json(const RunManifest& m);

std::string fnv1a_hex(const std::string& bytes);
// digest of a file's raw bytes; throws InputError when unreadable
std::string file_digest(const std::string& path);

std::string utc_now();

// Readers never see a partial file: contents go to a temporary in the same
// directory, then rename() swaps it in.
void atomic_write(const std::string& path, const std::string& contents);

} // namespace sr
