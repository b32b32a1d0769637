#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "helmlab/config.hpp"
#include "helmlab/numeric.hpp"

namespace helmlab {

using ReportValue = std::variant<double, long, std::string>;

inline std::string report_value_text(const ReportValue& v) {
    if (std::holds_alternative<double>(v)) return format_full(std::get<double>(v));
    if (std::holds_alternative<long>(v)) return std::to_string(std::get<long>(v));
    return std::get<std::string>(v);
}

/// One tabular report: named columns, typed cells, a deterministic header
/// carrying the resolved config and its hash (no timestamps, so identical
/// runs produce byte-identical files).
class Report {
public:
    Report(std::string tool, const Config& cfg, std::uint64_t seed)
        : tool_(std::move(tool)), config_text_(cfg.canonical()), hash_(cfg.hash()), seed_(seed) {}

    void columns(std::vector<std::string> names) { columns_ = std::move(names); }
    void add_row(std::vector<ReportValue> row) { rows_.push_back(std::move(row)); }
    void note(const std::string& key, ReportValue value) { notes_.emplace_back(key, std::move(value)); }

    std::string csv() const {
        std::ostringstream out;
        out << "# helmlab " << tool_ << "\n";
        char hex[20];
        std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash_));
        out << "# config_hash = " << hex << "\n";
        out << "# seed = " << seed_ << "\n";
        for (const auto& [k, v] : notes_) out << "# " << k << " = " << report_value_text(v) << "\n";
        std::istringstream cfg(config_text_);
        std::string line;
        while (std::getline(cfg, line)) out << "## " << line << "\n";
        for (std::size_t c = 0; c < columns_.size(); ++c)
            out << columns_[c] << (c + 1 < columns_.size() ? "," : "");
        out << "\n";
        for (const auto& row : rows_) {
            for (std::size_t c = 0; c < row.size(); ++c)
                out << report_value_text(row[c]) << (c + 1 < row.size() ? "," : "");
            out << "\n";
        }
        return out.str();
    }

    std::string json() const {
        nlohmann::ordered_json j;
        j["tool"] = tool_;
        char hex[20];
        std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash_));
        j["config_hash"] = hex;
        j["seed"] = seed_;
        for (const auto& [k, v] : notes_)
            std::visit([&](const auto& x) { j["notes"][k] = x; }, v);
        j["config"] = config_text_;
        j["columns"] = columns_;
        auto& rows = j["rows"];
        rows = nlohmann::ordered_json::array();
        for (const auto& row : rows_) {
            nlohmann::ordered_json r = nlohmann::ordered_json::array();
            for (const auto& cell : row)
                std::visit([&](const auto& x) { r.push_back(x); }, cell);
            rows.push_back(std::move(r));
        }
        return j.dump(2) + "\n";
    }

    /// writes <dir>/<name>.<ext>; creates the directory
    std::string write(const std::string& dir, const std::string& name, const std::string& format) const {
        namespace fs = std::filesystem;
        fs::create_directories(dir);
        const std::string ext = format == "json" ? ".json" : ".csv";
        const std::string path = (fs::path(dir) / (name + ext)).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cannot write report file: " + path);
        out << (format == "json" ? json() : csv());
        return path;
    }

private:
    std::string tool_;
    std::string config_text_;
    std::uint64_t hash_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<std::string> columns_;
    std::vector<std::vector<ReportValue>> rows_;
    std::vector<std::pair<std::string, ReportValue>> notes_;
};

}  // namespace helmlab
