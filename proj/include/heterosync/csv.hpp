#pragma once
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

// Plot-ready CSV tables: '#'-prefixed metadata lines, one header row, then
// numeric rows printed with %.17g (value-preserving round trip).

namespace hs {

struct ResultTable {
    std::vector<std::pair<std::string, std::string>> meta; // emitted as "# key = value"
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::initializer_list<double> vals) { rows.emplace_back(vals); }

    void check() const {
        for (auto& r : rows)
            if (r.size() != columns.size()) throw NumericError("ResultTable: ragged row");
    }
};

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_table(const std::string& path, const ResultTable& t) {
    t.check();
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file: " + path);
    for (auto& [k, v] : t.meta) out << "# " << k << " = " << v << "\n";
    for (size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << "\n";
    for (auto& r : t.rows) {
        for (size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_g17(r[i]);
        out << "\n";
    }
    if (!out) throw ConfigError("failed writing output file: " + path);
}

} // namespace hs
