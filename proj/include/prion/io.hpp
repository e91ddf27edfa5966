#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"

#include "prion/config.hpp"
#include "prion/report.hpp"

namespace prion {

inline constexpr const char* kVersion = "1.0.0";

/// Shortest text that reads back to the same double (17 significant digits).
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// CSV with a fixed header and full-precision numbers.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& file, std::vector<std::string> columns)
        : out_(file), columns_(columns.size()) {
        if (!out_) throw std::runtime_error("cannot write " + file.string());
        for (std::size_t k = 0; k < columns.size(); ++k) out_ << (k ? "," : "") << columns[k];
        out_ << '\n';
    }

    void row(const std::vector<double>& values) {
        if (values.size() != columns_) throw std::logic_error("csv row has the wrong number of columns");
        for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << format_double(values[k]);
        out_ << '\n';
        if (!out_) throw std::runtime_error("csv write failed");
    }

private:
    std::ofstream out_;
    std::size_t columns_;
};

/// Two-column text file "y u" of a density on the grid centers.
inline void write_snapshot(const std::filesystem::path& file, const Grid& g, const std::vector<double>& u) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "# y u\n";
    for (std::size_t i = 0; i < g.size(); ++i) out << format_double(g.centers()[i]) << ' ' << format_double(u[i]) << '\n';
}

/// nlohmann::json keeps object keys sorted, so dump() is canonical.
inline void write_json(const std::filesystem::path& file, const Json& j) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("json write failed");
}

inline Json to_json(const HypothesisReport& r) {
    Json j;
    j["condition_id"] = r.condition_id;
    j["status"] = to_string(r.status);
    j["constants"] = Json::object();
    for (const auto& [k, v] : r.constants) j["constants"][k] = v;
    j["witness"] = Json::object();
    for (const auto& [k, v] : r.witness) j["witness"][k] = v;
    j["note"] = r.note;
    return j;
}

inline Json to_json(const ReportList& list) {
    Json arr = Json::array();
    for (const auto& r : list) arr.push_back(to_json(r));
    return arr;
}

inline std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned int k = 0; k < len; ++k) {
        s += hex[digest[k] >> 4];
        s += hex[digest[k] & 15];
    }
    return s;
}

/// Hash of the canonical JSON form of the configuration.
inline std::string config_hash(const RunConfig& c) { return sha256_hex(to_json(c).dump()); }

inline Json manifest(const RunConfig& c, const std::string& subcommand, const std::vector<std::string>& files) {
    Json j;
    j["config_hash"] = config_hash(c);
    j["config"] = to_json(c);
    j["subcommand"] = subcommand;
    j["version"] = kVersion;
    j["compiler"] = __VERSION__;
    j["json_library"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                        std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                        std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    j["files"] = files;
    return j;
}

}  // namespace prion
