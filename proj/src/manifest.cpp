#include "sr/manifest.hpp"

#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "json.hpp"

#include "sr/errors.hpp"

namespace sr {

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a_hex(buf.str());
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string manifest_json(const RunManifest& m) {
    using nlohmann::json;
    json inputs = json::array();
    for (const auto& in : m.inputs)
        inputs.push_back(json{{"path", in.path}, {"fnv1a64", in.fnv1a64}});
    json resolved;
    try {
        resolved = json::parse(m.resolved_json.empty() ? "{}" : m.resolved_json);
    } catch (const json::exception& e) {
        throw InputError(std::string("manifest resolved config is not valid JSON: ") + e.what());
    }
    const json doc{{"schema_version", 1},
                   {"kind", "manifest"},
                   {"tool", "srtool"},
                   {"tool_version", kToolVersion},
                   {"command", m.command},
                   {"argv", m.argv},
                   {"resolved", std::move(resolved)},
                   {"seed", m.seed},
                   {"workers", m.workers},
                   {"inputs", std::move(inputs)},
                   {"outputs", m.outputs},
                   {"started_utc", m.started_utc},
                   {"wall_seconds", m.wall_seconds}};
    return doc.dump(2) + "\n";
}

void atomic_write(const std::string& path, const std::string& contents) {
    std::string tmp = path + ".tmpXXXXXX";
    const int fd = mkstemp(tmp.data());
    if (fd < 0) throw InputError("cannot create temporary file for '" + path + "'");
    std::size_t off = 0;
    while (off < contents.size()) {
        const ssize_t n = write(fd, contents.data() + off, contents.size() - off);
        if (n < 0) {
            close(fd);
            std::remove(tmp.c_str());
            throw InputError("write failed for '" + path + "'");
        }
        off += static_cast<std::size_t>(n);
    }
    close(fd);
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw InputError("cannot move output into place at '" + path + "'");
    }
}

} // namespace sr
