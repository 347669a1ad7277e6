#include "gaussfpt/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gaussfpt/errors.hpp"

namespace gaussfpt {

std::vector<double> CsvTable::column(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j] != name) continue;
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[j]);
        return out;
    }
    throw ConfigError("csv has no column '" + name + "'");
}

const std::string& CsvTable::meta(const std::string& key) const {
    for (const auto& [k, v] : metadata)
        if (k == key) return v;
    throw ConfigError("csv has no metadata key '" + key + "'");
}

std::string to_csv_string(const CsvTable& table) {
    std::string out;
    for (const auto& [k, v] : table.metadata) out += "# " + k + "=" + v + "\n";
    for (std::size_t j = 0; j < table.columns.size(); ++j)
        out += (j ? "," : "") + table.columns[j];
    out += "\n";
    char buf[32];
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw ConfigError("csv row width does not match the header");
        for (std::size_t j = 0; j < row.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", row[j]);
            if (j) out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            if (!body.empty() && body[0] == ' ') body.erase(0, 1);
            const auto eq = body.find('=');
            if (eq == std::string::npos) table.metadata.emplace_back(body, "");
            else table.metadata.emplace_back(body.substr(0, eq), body.substr(eq + 1));
            continue;
        }
        std::istringstream cells(line);
        std::string cell;
        if (!header) {
            while (std::getline(cells, cell, ',')) table.columns.push_back(cell);
            header = true;
            continue;
        }
        std::vector<double> row;
        while (std::getline(cells, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw ConfigError("csv line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            row.push_back(v);
        }
        if (row.size() != table.columns.size())
            throw ConfigError("csv line " + std::to_string(lineno) + ": expected " +
                              std::to_string(table.columns.size()) + " fields");
        table.rows.push_back(std::move(row));
    }
    if (!header) throw ConfigError("csv has no header row");
    return table;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(path.string() + ": cannot open for writing");
    const std::string text = to_csv_string(table);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ConfigError(path.string() + ": write failed");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

}  // namespace gaussfpt
