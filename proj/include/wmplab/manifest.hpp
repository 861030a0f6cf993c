#ifndef WMPLAB_MANIFEST_HPP
#define WMPLAB_MANIFEST_HPP

#include <map>
#include <string>

namespace wmplab {

inline constexpr const char* kVersion = "0.1.0";

/// 64-bit FNV-1a of a byte string, rendered as hex.
std::string fnv1a64_hex(const std::string& bytes);

/// Digest of a study output with wall-clock fields canonicalized to zero,
/// so that re-running an identical configuration reproduces the digest.
std::string payload_digest(const std::string& path);

/// Reproducibility sidecar written next to every study output.
struct RunManifest {
    std::string command_line;
    std::string config_json;  // serialized StudyConfig snapshot
    std::string version = kVersion;
    std::string timestamp;    // ISO 8601 UTC
    std::map<std::string, std::string> output_digests;
};

std::string iso8601_utc_now();
void write_manifest(const RunManifest& m, const std::string& path);

}  // namespace wmplab

#endif
