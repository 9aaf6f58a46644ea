#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "courage/error.hpp"

namespace courage::csv {

/// Splits one RFC 4180 record. Quoted fields may contain commas and doubled quotes;
/// embedded newlines are not supported (none of the inputs use them).
inline std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    out.push_back(std::move(field));
    return out;
}

inline std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += quote(fields[i]);
    }
    return out;
}

/// Line-oriented reader that tracks the line number for diagnostics.
class Reader {
public:
    Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            if (line.empty() || line == "\r") continue;
            fields = split_line(line);
            return true;
        }
        return false;
    }

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] const std::string& source() const noexcept { return source_; }

    [[noreturn]] void fail(const std::string& what) const {
        throw FormatError(source_ + ":" + std::to_string(line_) + ": " + what);
    }

private:
    std::istream& in_;
    std::string source_;
    std::size_t line_ = 0;
};

inline std::size_t require_column(const std::vector<std::string>& header, std::string_view name, const Reader& r) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    r.fail("missing column '" + std::string(name) + "'");
}

inline std::ptrdiff_t find_column(const std::vector<std::string>& header, std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<std::ptrdiff_t>(i);
    return -1;
}

} // namespace courage::csv
