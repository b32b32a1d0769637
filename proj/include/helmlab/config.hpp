#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "helmlab/numeric.hpp"

namespace helmlab {

/// Configuration / usage errors map to exit code 1; violated invariants or
/// acceptance tolerances map to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Strict key-value config with nested blocks:
///
///   dimension = 3
///   [grid]
///   n = 4000
///   rmax = 160
///   [potential]          # sections may repeat
///   kind = inverse_power
///   params.c = 0.1
///
/// Every key must be consumed by the runner; unknown keys are rejected with
/// their full path. No defaults for physics parameters.
class Config {
public:
    struct Entry {
        std::string key, value;
        mutable bool consumed = false;
    };
    struct Section {
        std::string name;  // "" for the top level
        std::vector<Entry> entries;
    };

    static Config parse_text(const std::string& text) {
        Config cfg;
        cfg.sections_.push_back({"", {}});
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError("config line " + std::to_string(lineno) +
                                                          ": malformed section header");
                cfg.sections_.push_back({trim(line.substr(1, line.size() - 2)), {}});
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            Entry e;
            e.key = trim(line.substr(0, eq));
            e.value = trim(line.substr(eq + 1));
            if (e.key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
            cfg.sections_.back().entries.push_back(std::move(e));
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_text(ss.str());
    }

    /// indices of all sections with the given name
    std::vector<int> section_indices(const std::string& name) const {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(sections_.size()); ++i)
            if (sections_[i].name == name && (!sections_[i].entries.empty() || !name.empty()))
                out.push_back(i);
        return out;
    }

    bool has(int section, const std::string& key) const { return find(section, key) != nullptr; }
    bool has(const std::string& section, const std::string& key) const {
        auto idx = section_indices(section);
        return !idx.empty() && has(idx.front(), key);
    }

    std::string get_string(int section, const std::string& key) const {
        const Entry* e = find(section, key);
        if (!e) throw ConfigError("missing config key " + path(section, key));
        e->consumed = true;
        return e->value;
    }
    std::string get_string(int section, const std::string& key, const std::string& fallback) const {
        const Entry* e = find(section, key);
        if (!e) return fallback;
        e->consumed = true;
        return e->value;
    }

    double get_double(int section, const std::string& key) const {
        return parse_double(get_string(section, key), path(section, key));
    }
    double get_double(int section, const std::string& key, double fallback) const {
        const Entry* e = find(section, key);
        if (!e) return fallback;
        e->consumed = true;
        return parse_double(e->value, path(section, key));
    }

    long get_int(int section, const std::string& key) const {
        const std::string s = get_string(section, key);
        char* end = nullptr;
        const long v = std::strtol(s.c_str(), &end, 10);
        if (end == s.c_str() || *end != '\0')
            throw ConfigError("config key " + path(section, key) + ": not an integer: " + s);
        return v;
    }
    long get_int(int section, const std::string& key, long fallback) const {
        if (!find(section, key)) return fallback;
        return get_int(section, key);
    }

    /// comma list of reals; logspace:lo:hi:count expands log-spaced values
    std::vector<double> get_list(int section, const std::string& key) const {
        const std::string s = get_string(section, key);
        if (s.rfind("logspace:", 0) == 0) {
            auto parts = split(s.substr(9), ':');
            if (parts.size() != 3) throw ConfigError(path(section, key) + ": logspace:lo:hi:count");
            return logspace(parse_double(parts[0], key), parse_double(parts[1], key),
                            static_cast<int>(std::strtol(parts[2].c_str(), nullptr, 10)));
        }
        std::vector<double> out;
        for (const auto& p : split(s, ','))
            if (!trim(p).empty()) out.push_back(parse_double(trim(p), path(section, key)));
        if (out.empty()) throw ConfigError(path(section, key) + ": empty list");
        return out;
    }

    /// single-instance section accessors
    int unique_section(const std::string& name) const {
        auto idx = section_indices(name);
        if (idx.empty()) throw ConfigError("missing config section [" + name + "]");
        if (idx.size() > 1) throw ConfigError("section [" + name + "] given more than once");
        return idx.front();
    }
    int optional_section(const std::string& name) const {
        auto idx = section_indices(name);
        if (idx.size() > 1) throw ConfigError("section [" + name + "] given more than once");
        return idx.empty() ? -1 : idx.front();
    }

    /// strict schema: every entry must have been consumed
    void require_all_consumed() const {
        for (int s = 0; s < static_cast<int>(sections_.size()); ++s)
            for (const auto& e : sections_[s].entries)
                if (!e.consumed)
                    throw ConfigError("unknown config key " + path(s, e.key));
    }

    /// canonical text (normalized spacing, original order) and its hash
    std::string canonical() const {
        std::string out;
        for (const auto& sec : sections_) {
            if (!sec.name.empty()) out += "[" + sec.name + "]\n";
            for (const auto& e : sec.entries) out += e.key + " = " + e.value + "\n";
        }
        return out;
    }
    std::uint64_t hash() const { return fnv1a64(canonical()); }

    /// override or append a top-level/sectioned key (used by --seed etc.)
    void override_key(const std::string& section, const std::string& key, const std::string& value) {
        for (auto& sec : sections_) {
            if (sec.name != section) continue;
            for (auto& e : sec.entries) {
                if (e.key == key) {
                    e.value = value;
                    return;
                }
            }
            sec.entries.push_back({key, value});
            return;
        }
        sections_.push_back({section, {{key, value}}});
    }

private:
    std::vector<Section> sections_;

    static std::string trim(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }
    static std::vector<std::string> split(const std::string& s, char sep) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == sep) {
                out.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        out.push_back(cur);
        return out;
    }
    static double parse_double(const std::string& s, const std::string& where) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0')
            throw ConfigError("config key " + where + ": not a number: " + s);
        return v;
    }
    const Entry* find(int section, const std::string& key) const {
        if (section < 0 || section >= static_cast<int>(sections_.size())) return nullptr;
        for (const auto& e : sections_[static_cast<std::size_t>(section)].entries)
            if (e.key == key) return &e;
        return nullptr;
    }
    std::string path(int section, const std::string& key) const {
        const auto& name = sections_[static_cast<std::size_t>(section)].name;
        return name.empty() ? key : name + "." + key;
    }
};

}  // namespace helmlab
