#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "roughflow/core/errors.hpp"

namespace roughflow {

inline constexpr const char* library_version = "0.1.0";

// Shortest round-trippable decimal form; locale-independent since the
// process never calls setlocale.
inline std::string format_full(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// 64-bit FNV-1a over raw bytes; tiny, dependency-free, and stable across
// platforms, which is all the manifest inventory needs (integrity tripwire,
// not cryptography).
inline std::uint64_t fnv1a(const unsigned char* data, std::size_t n,
                           std::uint64_t h = 14695981039346656037ull) {
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string() + " for hashing");
    std::uint64_t h = 14695981039346656037ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h = fnv1a(reinterpret_cast<const unsigned char*>(buf),
                  static_cast<std::size_t>(in.gcount()), h);
    char out[24];
    std::snprintf(out, sizeof(out), "fnv1a:%016llx", static_cast<unsigned long long>(h));
    return out;
}

// Plain CSV emission: one header row, then %.17g cells so reruns are
// byte-identical and values survive a round trip through text.
class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot create " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i)
            out_ << (i ? "," : "") << header[i];
        out_ << "\n";
        columns_ = header.size();
    }

    void row(const std::vector<double>& values) {
        if (values.size() != columns_)
            throw IoError("csv row width mismatch in " + path_.string());
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << (i ? "," : "") << format_full(values[i]);
        out_ << "\n";
    }

    // integer-labelled rows (particle ids, level indices)
    void row(std::size_t id, const std::vector<double>& values) {
        if (values.size() + 1 != columns_)
            throw IoError("csv row width mismatch in " + path_.string());
        out_ << id;
        for (double v : values) out_ << "," << format_full(v);
        out_ << "\n";
    }

    void close() {
        out_.flush();
        if (!out_) throw IoError("failed writing " + path_.string());
        out_.close();
    }

  private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t columns_ = 0;
};

// Run summary written last: config echo, timing, residual summary, and a
// hash inventory of every artifact the run produced.  The write goes through
// a temp file and an atomic rename so a crash never leaves a torn manifest.
struct RunManifest {
    std::string scenario;
    nlohmann::json config_echo;
    nlohmann::json residuals = nlohmann::json::object();
    std::map<std::string, std::string> files;
    std::string status = "ok";
    double wall_seconds = 0.0;

    void add_file(const std::filesystem::path& dir, const std::string& name) {
        files[name] = hash_file(dir / name);
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["version"] = library_version;
        j["scenario"] = scenario;
        j["config"] = config_echo;
        j["wall_seconds"] = wall_seconds;
        j["residuals"] = residuals;
        j["files"] = files;
        j["status"] = status;
        return j;
    }

    void write(const std::filesystem::path& dir) const {
        auto tmp = dir / "manifest.json.tmp";
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) throw IoError("cannot create " + tmp.string());
            out << to_json().dump(2) << "\n";
            out.flush();
            if (!out) throw IoError("failed writing " + tmp.string());
        }
        std::error_code ec;
        std::filesystem::rename(tmp, dir / "manifest.json", ec);
        if (ec) throw IoError("cannot finalize manifest: " + ec.message());
    }
};

class WallClock {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

} // namespace roughflow
