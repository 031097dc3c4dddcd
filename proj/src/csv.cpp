#include "lqrvol/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lqrvol/errors.hpp"

namespace lqrvol
{
namespace
{
std::string quote(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}
}  // namespace

std::string format_cell(const CsvCell& cell)
{
    if (const auto* d = std::get_if<double>(&cell)) {
        if (std::isnan(*d)) return "";
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", *d);
        return buf;
    }
    if (const auto* i = std::get_if<long long>(&cell)) return std::to_string(*i);
    return quote(std::get<std::string>(cell));
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns))
{
    if (columns_.empty()) throw InvalidParameter("columns", "a table needs at least one column");
}

void CsvTable::add_row(std::vector<CsvCell> row)
{
    if (row.size() != columns_.size())
        throw InvalidParameter("row", "expected " + std::to_string(columns_.size()) + " cells, got " +
                                          std::to_string(row.size()));
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const
{
    std::ostringstream out;
    for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << quote(columns_[i]);
    out << '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
        out << '\n';
    }
    return out.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

}  // namespace lqrvol
