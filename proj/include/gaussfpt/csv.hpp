#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace gaussfpt {

/// A numeric table preceded by `# key=value` metadata lines and a header row.
/// Values are written with 17 significant digits, so reading a file back reproduces every double.
struct CsvTable {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    /// Column by name; throws ConfigError if absent.
    std::vector<double> column(const std::string& name) const;
    /// Metadata value by key; throws ConfigError if absent.
    const std::string& meta(const std::string& key) const;
};

std::string to_csv_string(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

/// Writes with LF line endings, creating parent directories. Throws ConfigError on I/O failure.
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace gaussfpt
