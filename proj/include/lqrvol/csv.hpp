#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace lqrvol
{
using CsvCell = std::variant<double, long long, std::string>;

/// Doubles are written with 17 significant digits; NaN becomes an empty field.
std::string format_cell(const CsvCell& cell);

class CsvTable
{
public:
    explicit CsvTable(std::vector<std::string> columns);

    void add_row(std::vector<CsvCell> row);

    const std::vector<std::string>& columns() const noexcept { return columns_; }
    const std::vector<std::vector<CsvCell>>& rows() const noexcept { return rows_; }

    std::string str() const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<CsvCell>> rows_;
};

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace lqrvol
