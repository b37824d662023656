#pragma once

#include <string>
#include <vector>

namespace flexplan {

// Minimal CSV table: '#' comment lines before the header are kept so report
// files can carry their generating configuration; the first non-comment line
// is the header.
struct CsvTable {
    std::vector<std::string> comments;  // without leading '#'
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
    void require_columns(const std::vector<std::string>& names) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

std::vector<std::string> split_csv_line(const std::string& line);
std::string format_double(double v);  // shortest round-trip representation

}  // namespace flexplan
