#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "blowlab/errors.hpp"

namespace blowlab {

// Flat key-value experiment configuration with dotted sections, one
// `key = value` per line; '#' starts a comment. Keys must be declared by
// the experiment that consumes them: anything left unread is rejected, so
// typos fail loudly instead of silently using a default.
class RunConfig {
public:
    static RunConfig from_text(const std::string& text) {
        RunConfig cfg;
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigurationError("config line " + std::to_string(lineno) +
                                         ": expected 'key = value'");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            cfg.set(key, value, "line " + std::to_string(lineno));
        }
        return cfg;
    }

    static RunConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigurationError("cannot open config file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_text(buf.str());
    }

    // --override key=value: replaces or adds an entry.
    void apply_override(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos)
            throw ConfigurationError("override must look like key=value: " + assignment);
        const std::string key = trim(assignment.substr(0, eq));
        const std::string value = trim(assignment.substr(eq + 1));
        validate_key(key, "override");
        for (auto& kv : entries_) {
            if (kv.first == key) {
                kv.second = value;
                return;
            }
        }
        entries_.emplace_back(key, value);
    }

    bool has(const std::string& key) const { return find(key) != nullptr; }

    std::string get_string(const std::string& key) {
        const std::string* v = find(key);
        if (!v) throw ConfigurationError("missing required key '" + key + "'");
        consume(key, *v);
        return *v;
    }

    std::string get_string(const std::string& key, const std::string& fallback) {
        const std::string* v = find(key);
        const std::string value = v ? *v : fallback;
        consume(key, value);
        return value;
    }

    double get_double(const std::string& key) { return parse_double(key, get_string(key)); }

    double get_double(const std::string& key, double fallback) {
        const std::string* v = find(key);
        if (!v) {
            consume(key, format_double(fallback));
            return fallback;
        }
        consume(key, *v);
        return parse_double(key, *v);
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) {
        const std::string* v = find(key);
        if (!v) {
            consume(key, std::to_string(fallback));
            return fallback;
        }
        consume(key, *v);
        return parse_u64(key, *v);
    }

    bool get_bool(const std::string& key, bool fallback) {
        const std::string* v = find(key);
        if (!v) {
            consume(key, fallback ? "true" : "false");
            return fallback;
        }
        consume(key, *v);
        if (*v == "true" || *v == "1") return true;
        if (*v == "false" || *v == "0") return false;
        throw ConfigurationError("key '" + key + "': expected true/false, got '" + *v + "'");
    }

    std::vector<double> get_double_list(const std::string& key) {
        const std::string raw = get_string(key);
        std::vector<double> values;
        std::string item;
        std::istringstream in(raw);
        while (std::getline(in, item, ',')) {
            const std::string s = trim(item);
            if (s.empty())
                throw ConfigurationError("key '" + key + "': empty element in list");
            values.push_back(parse_double(key, s));
        }
        if (values.empty()) throw ConfigurationError("key '" + key + "': empty list");
        return values;
    }

    // Call after an experiment has read everything it understands.
    void reject_unknown_keys() const {
        std::vector<std::string> unknown;
        for (const auto& kv : entries_) {
            if (!consumed_.count(kv.first)) unknown.push_back(kv.first);
        }
        if (!unknown.empty()) {
            std::string msg = "unknown config key(s):";
            for (const auto& k : unknown) msg += " '" + k + "'";
            throw ConfigurationError(msg);
        }
    }

    // Raw entries in file order (pre-consumption echo of the input).
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    // Effective values in consumption order, defaults included.
    const std::vector<std::pair<std::string, std::string>>& effective() const {
        return effective_;
    }

    // FNV-1a over the sorted canonical entries; stable across reruns and
    // key reordering of the same logical config.
    std::string config_hash() const {
        std::vector<std::string> lines;
        lines.reserve(entries_.size());
        for (const auto& kv : entries_) lines.push_back(kv.first + "=" + kv.second);
        std::sort(lines.begin(), lines.end());
        std::uint64_t h = 1469598103934665603ULL;
        for (const auto& line : lines) {
            for (unsigned char c : line) {
                h ^= c;
                h *= 1099511628211ULL;
            }
            h ^= '\n';
            h *= 1099511628211ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t b = 0;
        std::size_t e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    static void validate_key(const std::string& key, const std::string& where) {
        if (key.empty()) throw ConfigurationError(where + ": empty key");
        for (char c : key) {
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.')
                throw ConfigurationError(where + ": invalid character in key '" + key + "'");
        }
    }

    void set(const std::string& key, const std::string& value, const std::string& where) {
        validate_key(key, where);
        for (const auto& kv : entries_) {
            if (kv.first == key)
                throw ConfigurationError(where + ": duplicate key '" + key + "'");
        }
        entries_.emplace_back(key, value);
    }

    const std::string* find(const std::string& key) const {
        for (const auto& kv : entries_) {
            if (kv.first == key) return &kv.second;
        }
        return nullptr;
    }

    void consume(const std::string& key, const std::string& value) {
        consumed_.insert(key);
        for (auto& kv : effective_) {
            if (kv.first == key) {
                kv.second = value;
                return;
            }
        }
        effective_.emplace_back(key, value);
    }

    static double parse_double(const std::string& key, const std::string& s) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0')
            throw ConfigurationError("key '" + key + "': expected a real number, got '" + s + "'");
        return v;
    }

    static std::uint64_t parse_u64(const std::string& key, const std::string& s) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
        if (end == s.c_str() || *end != '\0' || s.find('-') != std::string::npos)
            throw ConfigurationError("key '" + key + "': expected an unsigned integer, got '" +
                                     s + "'");
        return v;
    }

    static std::string format_double(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }

    std::vector<std::pair<std::string, std::string>> entries_;
    std::vector<std::pair<std::string, std::string>> effective_;
    std::set<std::string> consumed_;
};

} // namespace blowlab
