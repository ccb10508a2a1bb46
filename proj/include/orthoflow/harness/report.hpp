/// @file report.hpp
/// @brief Locale-independent number formatting and CSV output.
#pragma once

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace orthoflow::harness {

/// Shortest round-trip decimal form; "inf", "-inf", "nan" for non-finite values.
inline std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    if (r.ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
    return std::string(buf, r.ptr);
}

inline std::string format_int(long long v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

using CsvCell = std::variant<double, long long, std::string>;

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_.size(); }

    void add(std::vector<CsvCell> row) {
        if (row.size() != header_.size())
            throw std::invalid_argument("CsvTable: row has " + std::to_string(row.size()) + " cells, header has " +
                                        std::to_string(header_.size()));
        rows_.push_back(std::move(row));
    }

    std::string str() const {
        std::string out;
        auto line = [&](const auto& cells, auto&& fmt) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out += ',';
                out += fmt(cells[i]);
            }
            out += '\n';
        };
        line(header_, [](const std::string& s) { return s; });
        for (const auto& r : rows_)
            line(r, [](const CsvCell& c) {
                if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
                if (const auto* i = std::get_if<long long>(&c)) return format_int(*i);
                return std::get<std::string>(c);
            });
        return out;
    }

    void write(const std::string& path) const {
        std::ofstream os(path, std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + path + " for writing");
        os << str();
        if (!os) throw std::runtime_error("write failed for " + path);
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<CsvCell>> rows_;
};

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << text;
    if (!os) throw std::runtime_error("write failed for " + path);
}

}  // namespace orthoflow::harness
