#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace intragen {

// Provenance record written next to every subcommand's outputs. Digests are
// 64-bit FNV-1a over raw file bytes.
struct RunManifest {
    std::string tool_version;
    std::string subcommand;
    std::map<std::string, std::string> parameters;  // fully resolved
    std::map<std::string, std::string> inputs;      // path -> digest (hex)
    std::map<std::string, std::string> outputs;     // path -> digest (hex)
    double duration_seconds = 0.0;
};

std::uint64_t fnv1a64_file(const std::string& path);
std::string digest_hex(std::uint64_t digest);

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);
void save_manifest(const RunManifest& m, const std::string& path);
RunManifest load_manifest(const std::string& path);

// Recompute digests of the manifest's outputs (and inputs that still exist);
// returns human-readable mismatch descriptions, empty when clean. Paths are
// resolved relative to base_dir.
std::vector<std::string> verify_manifest(const RunManifest& m, const std::string& base_dir);

// Write bytes to `path + ".partial"` then rename onto path; a failure leaves
// only the .partial file behind.
void atomic_write_file(const std::string& path, const std::string& bytes);
void atomic_write_file(const std::string& path, const void* data, std::size_t size);

}  // namespace intragen
