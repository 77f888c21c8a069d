#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "blowlab/errors.hpp"

namespace blowlab {

inline constexpr const char* kToolVersion = "blowlab 0.1.0";

// Doubles are serialized with 17 significant digits everywhere so every
// numeric output round-trips exactly.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Minimal JSON value for the machine-readable summaries.
// ---------------------------------------------------------------------------

class JsonValue {
public:
    using Object = std::vector<std::pair<std::string, JsonValue>>;
    using Array = std::vector<JsonValue>;

    JsonValue() : data_(Object{}) {}
    JsonValue(double v) : data_(v) {}
    JsonValue(bool v) : data_(v) {}
    JsonValue(const char* v) : data_(std::string(v)) {}
    JsonValue(std::string v) : data_(std::move(v)) {}
    JsonValue(std::uint64_t v) : data_(v) {}
    JsonValue(int v) : data_(static_cast<std::uint64_t>(v)) {}
    JsonValue(Array v) : data_(std::move(v)) {}

    static JsonValue object() { return JsonValue(); }

    JsonValue& set(const std::string& key, JsonValue value) {
        auto& obj = std::get<Object>(data_);
        obj.emplace_back(key, std::move(value));
        return *this;
    }

    void push_back(JsonValue value) {
        if (!std::holds_alternative<Array>(data_)) data_ = Array{};
        std::get<Array>(data_).push_back(std::move(value));
    }

    std::string dump(int indent = 0) const {
        std::string out;
        write(out, indent);
        return out;
    }

private:
    void write(std::string& out, int indent) const {
        const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
        const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
        if (const auto* obj = std::get_if<Object>(&data_)) {
            if (obj->empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            for (std::size_t i = 0; i < obj->size(); ++i) {
                out += pad_in + '"' + escape((*obj)[i].first) + "\": ";
                (*obj)[i].second.write(out, indent + 1);
                if (i + 1 < obj->size()) out += ',';
                out += '\n';
            }
            out += pad + "}";
        } else if (const auto* arr = std::get_if<Array>(&data_)) {
            if (arr->empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < arr->size(); ++i) {
                out += pad_in;
                (*arr)[i].write(out, indent + 1);
                if (i + 1 < arr->size()) out += ',';
                out += '\n';
            }
            out += pad + "]";
        } else if (const auto* s = std::get_if<std::string>(&data_)) {
            out += '"' + escape(*s) + '"';
        } else if (const auto* b = std::get_if<bool>(&data_)) {
            out += *b ? "true" : "false";
        } else if (const auto* u = std::get_if<std::uint64_t>(&data_)) {
            out += std::to_string(*u);
        } else {
            out += format_number(std::get<double>(data_));
        }
    }

    static std::string escape(const std::string& s) {
        std::string out;
        out.reserve(s.size());
        for (char c : s) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\t': out += "\\t"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                        out += buf;
                    } else {
                        out += c;
                    }
            }
        }
        return out;
    }

    std::variant<Object, Array, std::string, bool, std::uint64_t, double> data_;
};

// ---------------------------------------------------------------------------
// CSV tables: comma separated, header row, LF line endings.
// ---------------------------------------------------------------------------

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    class Row {
    public:
        explicit Row(std::size_t expected) { cells_.reserve(expected); }
        Row& add(const std::string& s) {
            cells_.push_back(s);
            return *this;
        }
        Row& add(double v) { return add(format_number(v)); }
        Row& add(std::size_t v) { return add(std::to_string(v)); }
        const std::vector<std::string>& cells() const { return cells_; }

    private:
        std::vector<std::string> cells_;
    };

    Row& new_row() {
        rows_.emplace_back(header_.size());
        return rows_.back();
    }

    void write_to_stream(std::ostream& out) const {
        out << join(header_) << '\n';
        for (const auto& row : rows_) out << join(row.cells()) << '\n';
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);  // binary: LF on every platform
        if (!out) throw ConfigurationError("cannot write output file: " + path.string());
        write_to_stream(out);
    }

    std::size_t row_count() const { return rows_.size(); }

private:
    static std::string join(const std::vector<std::string>& cells) {
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) line += ',';
            line += cells[i];
        }
        return line;
    }

    std::vector<std::string> header_;
    std::vector<Row> rows_;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigurationError("cannot write output file: " + path.string());
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
}

} // namespace blowlab
