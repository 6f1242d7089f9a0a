#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pgsv/model.hpp"

namespace pgsv {

/// Bad flags, bad config keys, or inconsistent run settings (exit code 2).
class config_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unreadable or malformed input data (exit code 3).
class data_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

inline double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    while (first != last && (*first == ' ' || *first == '\t')) {
        ++first;
    }
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw data_error("non-numeric cell at row " + std::to_string(row) + ", column " +
                         std::to_string(col + 1) + ": '" + cell + "'");
    }
    if (std::isnan(v)) {
        throw data_error("NaN cell at row " + std::to_string(row) + ", column " +
                         std::to_string(col + 1));
    }
    return v;
}

}  // namespace detail

/// Shortest-round-trip style fixed 17-significant-digit formatting used for
/// every numeric output.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Load an n x p returns panel. Two layouts are accepted:
///  - a plain panel: header row naming p numeric columns;
///  - simulator output (header t,x,y1..yp): the y columns are taken from
///    rows with t >= 1; the t = 0 row carries the initial state only and
///    must leave the y cells empty.
inline ReturnsPanel load_returns_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw data_error("cannot open input file: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw data_error("empty file: " + path.string());
    }
    const auto header = detail::split_csv_line(line);
    const bool sim_layout = header.size() >= 3 && header[0] == "t" && header[1] == "x";
    const std::size_t skip = sim_layout ? 2 : 0;
    const std::size_t p = header.size() - skip;
    if (p == 0) {
        throw data_error("header names no data columns: " + path.string());
    }

    ReturnsPanel panel;
    panel.p = p;
    panel.labels.assign(header.begin() + static_cast<std::ptrdiff_t>(skip), header.end());

    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size()) {
            throw data_error("ragged row " + std::to_string(row) + ": got " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        }
        if (sim_layout) {
            const double t = detail::parse_cell(cells[0], row, 0);
            if (t == 0.0) {
                for (std::size_t c = skip; c < cells.size(); ++c) {
                    if (!cells[c].empty()) {
                        throw data_error("row " + std::to_string(row) +
                                         ": t = 0 row must leave return cells empty");
                    }
                }
                continue;
            }
        }
        for (std::size_t c = skip; c < cells.size(); ++c) {
            if (cells[c].empty()) {
                throw data_error("empty cell at row " + std::to_string(row) + ", column " +
                                 std::to_string(c + 1));
            }
            panel.data.push_back(detail::parse_cell(cells[c], row, c));
        }
    }
    panel.n = panel.data.size() / p;
    if (panel.n == 0) {
        throw data_error("no data rows in " + path.string());
    }
    return panel;
}

inline void write_returns_csv(const std::filesystem::path& path, const ReturnsPanel& y) {
    std::ofstream out(path);
    if (!out) {
        throw data_error("cannot write " + path.string());
    }
    for (std::size_t i = 0; i < y.p; ++i) {
        out << (i ? "," : "") << (i < y.labels.size() ? y.labels[i] : "y" + std::to_string(i + 1));
    }
    out << "\n";
    for (std::size_t t = 0; t < y.n; ++t) {
        for (std::size_t i = 0; i < y.p; ++i) {
            out << (i ? "," : "") << format_g17(y.at(t, i));
        }
        out << "\n";
    }
}

/// Simulator output: columns t, x, y1..yp; the t = 0 row carries x only.
inline void write_simulation_csv(const std::filesystem::path& path, const LatentPath& x,
                                 const ReturnsPanel& y) {
    std::ofstream out(path);
    if (!out) {
        throw data_error("cannot write " + path.string());
    }
    out << "t,x";
    for (std::size_t i = 0; i < y.p; ++i) {
        out << "," << (i < y.labels.size() ? y.labels[i] : "y" + std::to_string(i + 1));
    }
    out << "\n";
    out << "0," << format_g17(x[0]);
    for (std::size_t i = 0; i < y.p; ++i) {
        out << ",";
    }
    out << "\n";
    for (std::size_t t = 1; t <= y.n; ++t) {
        out << t << "," << format_g17(x[t]);
        for (std::size_t i = 0; i < y.p; ++i) {
            out << "," << format_g17(y.at(t - 1, i));
        }
        out << "\n";
    }
}

/// Numeric table with a header row, printed at 17 significant digits.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline void write_csv_table(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) {
        throw data_error("cannot write " + path.string());
    }
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out << (i ? "," : "") << table.columns[i];
    }
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << format_g17(row[i]);
        }
        out << "\n";
    }
}

inline CsvTable load_csv_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw data_error("cannot open " + path.string());
    }
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw data_error("empty file: " + path.string());
    }
    table.columns = detail::split_csv_line(line);
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != table.columns.size()) {
            throw data_error("ragged row " + std::to_string(row) + " in " + path.string());
        }
        std::vector<double> vals(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            vals[c] = detail::parse_cell(cells[c], row, c);
        }
        table.rows.push_back(std::move(vals));
    }
    return table;
}

/// Flat key-value config with [section] headers and '#' comments. Keys are
/// stored as "section.key".
class ConfigMap {
public:
    ConfigMap() = default;

    static ConfigMap parse_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) {
            throw config_error("cannot open config file: " + path.string());
        }
        ConfigMap cfg;
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) {
                line.erase(hash);
            }
            auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t\r");
                const auto b = s.find_last_not_of(" \t\r");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            line = trim(line);
            if (line.empty()) {
                continue;
            }
            if (line.front() == '[' && line.back() == ']') {
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw config_error("config line " + std::to_string(lineno) +
                                   ": expected key = value");
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) {
                throw config_error("config line " + std::to_string(lineno) + ": empty key");
            }
            cfg.set(section.empty() ? key : section + "." + key, value);
        }
        return cfg;
    }

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::optional<std::string> get(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        const auto v = get(key);
        if (!v) {
            return fallback;
        }
        try {
            std::size_t used = 0;
            const double d = std::stod(*v, &used);
            if (used != v->size()) {
                throw std::invalid_argument(*v);
            }
            return d;
        } catch (const std::exception&) {
            throw config_error("config key '" + key + "': expected a number, got '" + *v + "'");
        }
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        const auto v = get(key);
        if (!v) {
            return fallback;
        }
        std::uint64_t out = 0;
        const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
        if (res.ec != std::errc{} || res.ptr != v->data() + v->size()) {
            throw config_error("config key '" + key + "': expected an unsigned integer, got '" +
                               *v + "'");
        }
        return out;
    }

    std::string get_string(const std::string& key, std::string fallback) const {
        return get(key).value_or(std::move(fallback));
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// FNV-1a 64-bit digest of a file's bytes, hex-printed.
inline std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw data_error("cannot open file for digest: " + path.string());
    }
    std::uint64_t h = 1469598103934665603ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

/// Record of one CLI run: the command, resolved config, input digest and
/// emitted files, written one field per line.
struct RunManifest {
    std::string command;
    std::uint64_t seed = 0;
    std::string input;
    std::string input_digest;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;
    std::string config_echo_file;

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) {
            throw data_error("cannot write manifest: " + path.string());
        }
        out << "command: " << command << "\n";
        out << "seed: " << seed << "\n";
        if (!input.empty()) {
            out << "input: " << input << "\n";
            out << "input_digest: " << input_digest << "\n";
        }
        out << "config: " << config_echo_file << "\n";
        for (const auto& f : outputs) {
            out << "output: " << f << "\n";
        }
        out << "wall_seconds: " << format_g17(wall_seconds) << "\n";
    }
};

}  // namespace pgsv
