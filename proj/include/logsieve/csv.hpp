#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace logsieve::csv {

using Row = std::vector<std::string>;

/// Comma-separated table with a header row. Fields follow RFC 4180 quoting; quoted fields may span lines.
struct Table {
    Row header;
    std::vector<Row> rows;

    /// Index of a header column, or nullopt.
    [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const;
    /// Like column() but throws IoError naming the missing column.
    [[nodiscard]] std::size_t require(std::string_view name) const;
};

Table read(std::istream& in);
Table read_file(const std::filesystem::path& path);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const Row& row);

}  // namespace logsieve::csv
