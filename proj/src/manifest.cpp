#include "safeinit/manifest.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "safeinit/rng.hpp"

namespace safeinit {

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["tool_version"] = tool_version;
    if (seeded) j["seed"] = seed;
    j["duration_seconds"] = duration_seconds;
    j["config"] = config;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["extra"] = extra;
    return j;
}

std::string hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("hash_file: cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016" PRIx64, fnv1a64(bytes));
    return buf;
}

void atomic_write(const std::filesystem::path& path, std::string_view bytes) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    fs::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw std::runtime_error("atomic_write: short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_manifest(const RunManifest& m, const std::filesystem::path& artifact_path) {
    const std::filesystem::path mpath = artifact_path.string() + ".manifest.json";
    atomic_write(mpath, m.to_json().dump(2) + "\n");
}

std::optional<nlohmann::json> read_manifest_for(const std::filesystem::path& artifact_path) {
    const std::filesystem::path mpath = artifact_path.string() + ".manifest.json";
    std::ifstream in(mpath);
    if (!in) return std::nullopt;
    nlohmann::json j;
    in >> j;
    return j;
}

void verify_manifest_hashes(const nlohmann::json& manifest,
                            const std::filesystem::path& base_dir) {
    for (const char* section : {"inputs", "outputs"}) {
        if (!manifest.contains(section)) continue;
        for (const auto& [name, entry] : manifest[section].items()) {
            if (!entry.contains("path") || !entry.contains("hash")) continue;
            std::filesystem::path p = entry["path"].get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            if (!std::filesystem::exists(p)) continue;  // inputs may live elsewhere
            const std::string actual = hash_file(p);
            const std::string recorded = entry["hash"].get<std::string>();
            if (actual != recorded) {
                throw std::invalid_argument("manifest hash mismatch for " + name + " (" +
                                            p.string() + "): recorded " + recorded +
                                            ", actual " + actual);
            }
        }
    }
}

}  // namespace safeinit
