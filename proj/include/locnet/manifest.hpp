#pragma once

// Run manifests: configuration snapshot, version, seed, timestamps and SHA-256
// checksums of every emitted file. Files are written via a temporary sibling
// and renamed into place.

#include <openssl/evp.h>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "locnet/io.hpp"
#include "locnet/version.hpp"

namespace locnet {

inline std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int k = 0; k < len; ++k) {
        out.push_back(hex[digest[k] >> 4]);
        out.push_back(hex[digest[k] & 0xF]);
    }
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes `content` to `path` through a temporary file in the same directory.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp = std::chrono::system_clock::now()) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunManifest {
    std::string command;
    std::string config_text;
    std::uint64_t seed = 0;
    std::string started;
    std::string finished;
    std::vector<std::pair<std::string, std::string>> files;  // name, sha256

    [[nodiscard]] json to_json() const {
        json j;
        j["toolkit"] = "locnet";
        j["version"] = version;
        j["command"] = command;
        j["seed"] = seed;
        j["started"] = started;
        j["finished"] = finished;
        json f = json::object();
        for (const auto& [name, sum] : files) f[name] = sum;
        j["files"] = std::move(f);
        j["config"] = config_text;
        return j;
    }
};

/// Collects output files for one run and writes them plus manifest.json.
class OutputSet {
public:
    OutputSet(std::filesystem::path dir, std::string command, std::string config_text, std::uint64_t seed)
        : dir_(std::move(dir)) {
        manifest_.command = std::move(command);
        manifest_.config_text = std::move(config_text);
        manifest_.seed = seed;
        manifest_.started = utc_timestamp();
    }

    void add(const std::string& name, std::string_view content) {
        write_file_atomic(dir_ / name, content);
        manifest_.files.emplace_back(name, sha256_hex(content));
    }

    /// Writes manifest.json; returns its path.
    std::filesystem::path finish() {
        manifest_.finished = utc_timestamp();
        const auto path = dir_ / "manifest.json";
        write_file_atomic(path, manifest_.to_json().dump(2) + "\n");
        return path;
    }

    [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    std::filesystem::path dir_;
    RunManifest manifest_;
};

}  // namespace locnet
