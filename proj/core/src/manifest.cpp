#include "intragen/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "intragen/rng.hpp"

namespace intragen {

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::uint64_t h = 14695981039346656037ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

std::string digest_hex(std::uint64_t digest) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest));
    return buf;
}

std::string manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["tool_version"] = m.tool_version;
    j["subcommand"] = m.subcommand;
    j["parameters"] = m.parameters;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    j["duration_seconds"] = m.duration_seconds;
    return j.dump(2);
}

RunManifest manifest_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.subcommand = j.at("subcommand").get<std::string>();
    m.parameters = j.value("parameters", std::map<std::string, std::string>{});
    m.inputs = j.value("inputs", std::map<std::string, std::string>{});
    m.outputs = j.value("outputs", std::map<std::string, std::string>{});
    m.duration_seconds = j.value("duration_seconds", 0.0);
    return m;
}

void save_manifest(const RunManifest& m, const std::string& path) {
    atomic_write_file(path, manifest_to_json(m) + "\n");
}

RunManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return manifest_from_json(ss.str());
}

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / p).string();
}

}  // namespace

std::vector<std::string> verify_manifest(const RunManifest& m, const std::string& base_dir) {
    std::vector<std::string> problems;
    for (const auto& [path, expected] : m.outputs) {
        const std::string full = resolve(base_dir, path);
        if (!std::filesystem::exists(full)) {
            problems.push_back("missing output: " + path);
            continue;
        }
        const std::string actual = digest_hex(fnv1a64_file(full));
        if (actual != expected)
            problems.push_back("output digest mismatch: " + path + " (expected " + expected +
                               ", got " + actual + ")");
    }
    for (const auto& [path, expected] : m.inputs) {
        const std::string full = resolve(base_dir, path);
        if (!std::filesystem::exists(full)) continue;  // inputs may have moved on
        const std::string actual = digest_hex(fnv1a64_file(full));
        if (actual != expected)
            problems.push_back("input digest mismatch: " + path + " (expected " + expected +
                               ", got " + actual + ")");
    }
    return problems;
}

void atomic_write_file(const std::string& path, const void* data, std::size_t size) {
    const std::string partial = path + ".partial";
    {
        std::ofstream out(partial, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + partial);
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
        if (!out) throw std::runtime_error("short write to " + partial);
    }
    std::error_code ec;
    std::filesystem::rename(partial, path, ec);
    if (ec) throw std::runtime_error("cannot rename " + partial + " to " + path + ": " + ec.message());
}

void atomic_write_file(const std::string& path, const std::string& bytes) {
    atomic_write_file(path, bytes.data(), bytes.size());
}

}  // namespace intragen
