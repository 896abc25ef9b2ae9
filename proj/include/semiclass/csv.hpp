#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace semiclass {

/// Shortest-round-trip decimal formatting; keeps CSV output byte-stable
/// across runs of the same build.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != columns.size())
            throw std::invalid_argument("csv row arity mismatch");
        rows.push_back(std::move(cells));
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out)
            throw std::runtime_error("cannot write csv: " + path.string());
        for (std::size_t i = 0; i < columns.size(); ++i)
            out << columns[i] << (i + 1 < columns.size() ? "," : "\n");
        for (const auto& row : rows)
            for (std::size_t i = 0; i < row.size(); ++i)
                out << row[i] << (i + 1 < row.size() ? "," : "\n");
    }
};

}  // namespace semiclass
