#include "wmplab/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "wmplab/geometry.hpp"  // Error

namespace wmplab {

std::string fnv1a64_hex(const std::string& bytes) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

// Blank the wall-clock fields: the last CSV column ("seconds") and any
// "seconds" keys in JSON rows.
std::string canonicalize(const std::string& path, const std::string& text) {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        auto j = nlohmann::json::parse(text);
        if (j.contains("rows"))
            for (auto& row : j["rows"])
                if (row.contains("seconds")) row["seconds"] = 0.0;
        return j.dump();
    }
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!first) {
            const auto pos = line.rfind(',');
            if (pos != std::string::npos) line = line.substr(0, pos + 1) + "0";
        }
        out << line << "\n";
        first = false;
    }
    return out.str();
}

}  // namespace

std::string payload_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a64_hex(canonicalize(path, buf.str()));
}

std::string iso8601_utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const RunManifest& m, const std::string& path) {
    nlohmann::json j;
    j["command_line"] = m.command_line;
    j["config"] = nlohmann::json::parse(m.config_json.empty() ? "{}" : m.config_json);
    j["library_version"] = m.version;
    j["timestamp"] = m.timestamp;
    j["payload_digests"] = m.output_digests;
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

}  // namespace wmplab
