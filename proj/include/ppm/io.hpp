#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace ppm {

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data; // data[c][row]

    void add(std::string name, std::vector<double> values);
    std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
};

/// Comment lines "# key: <json>" for every header entry, then a column row and %.12e values.
void write_csv(const std::filesystem::path& path, const Table& table, const nlohmann::json& header);
Table read_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Line plot of every column against the first one.
void write_svg(const std::filesystem::path& path, const Table& table, const std::string& title);

} // namespace ppm
