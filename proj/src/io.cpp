#include "ppm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ppm/types.hpp"

namespace ppm {

void Table::add(std::string name, std::vector<double> values)
{
    if (!data.empty() && values.size() != rows())
        throw ValidationError("table column '" + name + "' has " + std::to_string(values.size()) + " rows, expected "
                              + std::to_string(rows()));
    columns.push_back(std::move(name));
    data.push_back(std::move(values));
}

void write_csv(const std::filesystem::path& path, const Table& table, const nlohmann::json& header)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw ValidationError("cannot open " + path.string() + " for writing");
    for (const auto& [key, value] : header.items())
        out << "# " << key << ": " << value.dump() << '\n';
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        out << (c ? "," : "") << table.columns[c];
    out << '\n';
    char buf[32];
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.12e", table.data[c][r]);
            out << (c ? "," : "") << buf;
        }
        out << '\n';
    }
}

Table read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open " + path.string());
    Table t;
    std::string line;
    bool have_columns = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::stringstream ss(line);
        std::string cell;
        if (!have_columns) {
            while (std::getline(ss, cell, ','))
                t.columns.push_back(cell);
            t.data.resize(t.columns.size());
            have_columns = true;
            continue;
        }
        std::size_t c = 0;
        while (std::getline(ss, cell, ',') && c < t.data.size())
            t.data[c++].push_back(std::stod(cell));
    }
    return t;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw ValidationError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_svg(const std::filesystem::path& path, const Table& table, const std::string& title)
{
    if (table.columns.size() < 2 || table.rows() < 2)
        return;
    constexpr double w = 720, h = 420, pad = 50;
    const auto& x = table.data[0];
    const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
    double ymin = INFINITY, ymax = -INFINITY;
    for (std::size_t c = 1; c < table.data.size(); ++c)
        for (double v : table.data[c])
            if (std::isfinite(v)) {
                ymin = std::min(ymin, v);
                ymax = std::max(ymax, v);
            }
    if (!(ymax > ymin))
        ymax = ymin + 1.0;
    const double xmin = *xmin_it, xmax = *xmax_it > *xmin_it ? *xmax_it : *xmin_it + 1.0;
    auto px = [&](double v) { return pad + (v - xmin) / (xmax - xmin) * (w - 2 * pad); };
    auto py = [&](double v) { return h - pad - (v - ymin) / (ymax - ymin) * (h - 2 * pad); };
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"};

    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
        << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << w - 2 * pad << "\" height=\"" << h - 2 * pad
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << pad << "\" y=\"" << h - pad + 16 << "\" font-size=\"11\">" << xmin << "</text>\n"
        << "<text x=\"" << w - pad << "\" y=\"" << h - pad + 16 << "\" font-size=\"11\" text-anchor=\"end\">" << xmax
        << "</text>\n"
        << "<text x=\"" << pad - 4 << "\" y=\"" << h - pad << "\" font-size=\"11\" text-anchor=\"end\">" << ymin
        << "</text>\n"
        << "<text x=\"" << pad - 4 << "\" y=\"" << pad + 10 << "\" font-size=\"11\" text-anchor=\"end\">" << ymax
        << "</text>\n";
    for (std::size_t c = 1; c < table.data.size(); ++c) {
        const char* color = colors[(c - 1) % 7];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t r = 0; r < table.rows(); ++r)
            if (std::isfinite(table.data[c][r]))
                out << px(x[r]) << ',' << py(table.data[c][r]) << ' ';
        out << "\"/>\n<text x=\"" << w - pad - 4 << "\" y=\"" << pad + 14 * static_cast<double>(c) << "\" fill=\""
            << color << "\" font-size=\"12\" text-anchor=\"end\">" << table.columns[c] << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace ppm
