#ifndef BOUNDGP_CSV_HPP
#define BOUNDGP_CSV_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "boundgp/domain_grid.hpp"
#include "boundgp/errors.hpp"

namespace boundgp {

/// Points with one value per point (regression target, 0/1 label or count).
struct Dataset {
    std::vector<Point2> points;
    std::vector<double> targets;
};

/// General notation, 17 significant digits.
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return {buf.data(), res.ptr};
}

inline void write_csv_row(std::ostream& out, std::initializer_list<double> values) {
    bool first = true;
    for (const double v : values) {
        if (!first) {
            out << ',';
        }
        out << format_double(v);
        first = false;
    }
    out << '\n';
}

namespace detail {

inline double parse_field(std::string_view field, std::size_t offset) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
        field.remove_prefix(1);
        ++offset;
    }
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
        field.remove_suffix(1);
    }
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw ParseError("invalid number in CSV: '" + std::string(field) + "'", offset);
    }
    if (!std::isfinite(v)) {
        throw ParseError("non-finite number in CSV", offset);
    }
    return v;
}

}  // namespace detail

/// Parses CSV text with a header row and at least three columns; the first
/// three are read as x, y and the target. Blank lines are skipped.
inline Dataset parse_dataset(const std::string& text) {
    Dataset data;
    std::size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) {
            end = text.size();
        }
        const std::string_view line(text.data() + pos, end - pos);
        const bool blank = line.find_first_not_of(" \t\r") == std::string_view::npos;
        if (!blank) {
            std::vector<std::pair<std::string_view, std::size_t>> fields;
            std::size_t start = 0;
            while (true) {
                const std::size_t comma = line.find(',', start);
                fields.emplace_back(line.substr(start, comma - start), pos + start);
                if (comma == std::string_view::npos) {
                    break;
                }
                start = comma + 1;
            }
            if (fields.size() < 3) {
                throw ParseError("CSV row needs at least three columns", pos);
            }
            if (!header) {
                data.points.push_back(
                    {detail::parse_field(fields[0].first, fields[0].second),
                     detail::parse_field(fields[1].first, fields[1].second)});
                data.targets.push_back(detail::parse_field(fields[2].first, fields[2].second));
            }
            header = false;
        }
        pos = end + 1;
    }
    return data;
}

inline Dataset load_dataset(const std::string& path) { return parse_dataset(detail::read_file(path)); }

/// Points from a CSV whose first two columns are x and y (header row
/// required, further columns ignored).
inline std::vector<Point2> load_points(const std::string& path) {
    std::string text = detail::read_file(path);
    // reuse the dataset parser by padding a dummy third column where missing
    std::string padded;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) {
            end = text.size();
        }
        std::string line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") != std::string::npos &&
            std::count(line.begin(), line.end(), ',') < 2) {
            line += ",0";
        }
        padded += line;
        padded += '\n';
        pos = end + 1;
    }
    return parse_dataset(padded).points;
}

}  // namespace boundgp

#endif
