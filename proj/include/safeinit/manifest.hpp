#ifndef SAFEINIT_MANIFEST_HPP
#define SAFEINIT_MANIFEST_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace safeinit {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Provenance record written next to every artifact as <artifact>.manifest.json:
// the command, the fully resolved configuration, the seed, hashes of inputs and
// outputs, tool version, and wall-clock duration.
struct RunManifest {
    std::string command;
    std::string tool_version{kToolVersion};
    bool seeded = false;
    std::uint64_t seed = 0;
    double duration_seconds = 0.0;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json inputs = nlohmann::json::object();   // name -> {path, hash}
    nlohmann::json outputs = nlohmann::json::object();  // name -> {path, hash}
    nlohmann::json extra = nlohmann::json::object();

    nlohmann::json to_json() const;
};

// Content hash of a file, formatted "fnv1a64:<16 hex digits>".
std::string hash_file(const std::filesystem::path& path);

// Writes bytes to a temporary file in the target directory, then renames it
// over the destination so readers never observe a partial artifact.
void atomic_write(const std::filesystem::path& path, std::string_view bytes);

void write_manifest(const RunManifest& m, const std::filesystem::path& artifact_path);

// Manifest sitting next to an artifact, if any.
std::optional<nlohmann::json> read_manifest_for(const std::filesystem::path& artifact_path);

// Re-hashes every input/output file the manifest mentions (resolved relative
// to base_dir) and throws if any hash disagrees with the recorded one.
void verify_manifest_hashes(const nlohmann::json& manifest,
                            const std::filesystem::path& base_dir);

}  // namespace safeinit

#endif
