#pragma once

// Plain-text exchange formats: comma-separated tables with '#' provenance
// lines, lens catalogs, and 8-bit portable graymaps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cascade.hpp"
#include "config_search.hpp"
#include "errors.hpp"
#include "interferometer.hpp"
#include "lg_mode.hpp"

namespace gouy::io {

inline std::string format_number(double v, int significant = 10) {
    if (v == 0.0) v = 0.0;  // no "-0"
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", significant, v);
    return buf;
}

struct CsvTable {
    std::vector<std::string> comments;  // without the leading "# "
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw invalid_input("csv: no column named '" + name + "'");
    }

    double number(std::size_t row, const std::string& name) const {
        const std::string& cell = rows.at(row).at(column(name));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != cell.size()) throw invalid_input("csv: '" + cell + "' is not a number");
        return v;
    }
};

inline void write_csv(std::ostream& os, const CsvTable& t) {
    for (const auto& c : t.comments) os << "# " << c << '\n';
    auto line = [&os](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
}

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Inverse of write_csv. The first non-comment line is the header.
inline CsvTable read_csv(std::istream& is) {
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            t.comments.push_back(line.size() > 2 && line[1] == ' ' ? line.substr(2) : line.substr(1));
            continue;
        }
        auto cells = split_line(line);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
        } else {
            if (cells.size() != t.header.size())
                throw invalid_input("csv: row has " + std::to_string(cells.size()) + " cells, header has " +
                                    std::to_string(t.header.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    if (!have_header) throw invalid_input("csv: missing header line");
    return t;
}

// Search results: lengths in mm, phase in units of pi, 6 significant digits.
inline CsvTable search_table(const std::vector<ConfigurationRecord>& records, std::vector<std::string> comments) {
    CsvTable t{std::move(comments),
               {"f1_mm", "f2_mm", "f3_mm", "d1_mm", "d2_mm", "delta_gouy_over_pi", "q_residual_m", "vis_p0", "vis_pn"},
               {}};
    auto g = [](double v) { return format_number(v, 6); };
    for (const auto& r : records)
        t.rows.push_back({g(r.f1 * 1e3), g(r.f2 * 1e3), g(r.f3 * 1e3), g(r.d1 * 1e3), g(r.d2 * 1e3),
                          g(r.delta_gouy / pi), g(r.q_residual), g(r.vis_p0), g(r.vis_pn)});
    return t;
}

inline std::vector<ConfigurationRecord> records_from_table(const CsvTable& t) {
    std::vector<ConfigurationRecord> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        ConfigurationRecord r;
        r.f1 = t.number(i, "f1_mm") * 1e-3;
        r.f2 = t.number(i, "f2_mm") * 1e-3;
        r.f3 = t.number(i, "f3_mm") * 1e-3;
        r.d1 = t.number(i, "d1_mm") * 1e-3;
        r.d2 = t.number(i, "d2_mm") * 1e-3;
        r.delta_gouy = t.number(i, "delta_gouy_over_pi") * pi;
        r.q_residual = t.number(i, "q_residual_m");
        r.vis_p0 = t.number(i, "vis_p0");
        r.vis_pn = t.number(i, "vis_pn");
        out.push_back(r);
    }
    return out;
}

inline CsvTable sweep_table(const std::vector<SweepEntry>& entries, std::vector<std::string> comments) {
    CsvTable t{std::move(comments), {"p", "ell", "m", "I1", "I2", "visibility"}, {}};
    for (const auto& e : entries)
        t.rows.push_back({std::to_string(e.mode.p), std::to_string(e.mode.ell), std::to_string(e.mode.order()),
                          format_number(e.result.i1), format_number(e.result.i2),
                          format_number(e.result.visibility)});
    return t;
}

inline CsvTable routing_table(const RoutingMatrix& m, std::vector<std::string> comments) {
    CsvTable t{std::move(comments), {"p", "ell"}, {}};
    for (int c = 1; c <= m.channels; ++c) t.header.push_back("ch" + std::to_string(c));
    for (std::size_t r = 0; r < m.rows(); ++r) {
        std::vector<std::string> row{std::to_string(m.modes[r].p), std::to_string(m.modes[r].ell)};
        for (int c = 1; c <= m.channels; ++c) row.push_back(format_number(m.at(r, c)));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline void write_intensity_csv(std::ostream& os, const IntensityGrid& g) {
    const double hw = g.half_width * 1e3;
    os << "# intensity |E|^2, row-major, first row at y = +" << format_number(hw) << " mm\n";
    os << "# extent_mm: x " << format_number(-hw) << " " << format_number(hw) << " y " << format_number(-hw) << " "
       << format_number(hw) << "\n";
    os << "# size: " << g.size << " x " << g.size << "\n";
    for (int r = 0; r < g.size; ++r) {
        for (int c = 0; c < g.size; ++c) os << (c ? "," : "") << format_number(g.at(r, c));
        os << '\n';
    }
}

inline IntensityGrid read_intensity_csv(std::istream& is) {
    std::vector<std::vector<double>> rows;
    double hw_mm = 0.0;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (const auto pos = line.find("extent_mm: x "); pos != std::string::npos) {
                std::istringstream ss(line.substr(pos + 13));
                double lo;
                ss >> lo >> hw_mm;
            }
            continue;
        }
        std::vector<double> row;
        for (const auto& cell : split_line(line)) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    IntensityGrid g{static_cast<int>(rows.size()), hw_mm * 1e-3, {}};
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != g.size) throw invalid_input("intensity csv: matrix is not square");
        g.values.insert(g.values.end(), r.begin(), r.end());
    }
    return g;
}

// Binary 8-bit graymap scaled to the grid maximum.
inline void write_pgm(std::ostream& os, const IntensityGrid& g) {
    const double hw = g.half_width * 1e3;
    os << "P5\n# extent_mm: x " << format_number(-hw) << " " << format_number(hw) << " y " << format_number(-hw)
       << " " << format_number(hw) << "\n"
       << g.size << " " << g.size << "\n255\n";
    const double peak = g.max();
    for (double v : g.values) {
        const double s = peak > 0.0 ? v / peak : 0.0;
        os.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(std::clamp(s, 0.0, 1.0) * 255.0))));
    }
}

struct GrayImage {
    int width = 0, height = 0;
    std::vector<std::string> comments;
    std::vector<std::uint8_t> pixels;
};

inline GrayImage read_pgm(std::istream& is) {
    std::string magic;
    is >> magic;
    if (magic != "P5") throw invalid_input("pgm: not a binary graymap");
    GrayImage img;
    int maxval = 0;
    std::vector<int> numbers;
    while (numbers.size() < 3) {
        is >> std::ws;
        if (is.peek() == '#') {
            std::string c;
            std::getline(is, c);
            img.comments.push_back(c.substr(1));
            continue;
        }
        int v;
        if (!(is >> v)) throw invalid_input("pgm: truncated header");
        numbers.push_back(v);
    }
    img.width = numbers[0];
    img.height = numbers[1];
    maxval = numbers[2];
    if (maxval != 255) throw invalid_input("pgm: only 8-bit graymaps are supported");
    is.get();
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    is.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!is) throw invalid_input("pgm: truncated pixel data");
    return img;
}

}  // namespace gouy::io
