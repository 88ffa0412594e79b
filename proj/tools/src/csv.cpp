#include <sparselogit_cli/csv.hpp>

#include <sparselogit/errors.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <string_view>

namespace sparselogit::cli {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::optional<double> parse_number(std::string_view field) {
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) return std::nullopt;
    return value;
}

std::string at_line(const std::string& path, std::size_t line) {
    return path + ":" + std::to_string(line) + ": ";
}

struct RawLines {
    std::vector<std::string> text;
    std::vector<std::size_t> number;  // 1-based line numbers of non-blank lines
};

RawLines read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    RawLines lines;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (number == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        lines.text.push_back(line);
        lines.number.push_back(number);
    }
    return lines;
}

bool all_numeric(const std::vector<std::string_view>& fields) {
    for (std::string_view f : fields)
        if (!parse_number(f)) return false;
    return true;
}

}  // namespace

CsvTable read_data_csv(const std::string& path) {
    const RawLines lines = read_lines(path);
    CsvTable table;
    std::size_t first = 0;
    std::size_t width = 0;
    if (!lines.text.empty()) {
        const auto fields = split(lines.text[0]);
        width = fields.size();
        if (!all_numeric(fields)) {
            for (std::size_t k = 1; k < fields.size(); ++k) table.names.emplace_back(fields[k]);
            first = 1;
        }
    }
    const std::size_t rows = lines.text.size() - first;
    if (rows == 0) throw DataError(path + ": no data rows");
    if (width < 2) throw DataError(at_line(path, lines.number[0]) + "need a response and at least one predictor");

    table.X.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width - 1));
    table.y.resize(static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t line = lines.number[first + r];
        const auto fields = split(lines.text[first + r]);
        if (fields.size() != width) {
            throw DataError(at_line(path, line) + "expected " + std::to_string(width) + " fields, found " +
                            std::to_string(fields.size()));
        }
        const auto i = static_cast<Eigen::Index>(r);
        for (std::size_t c = 0; c < width; ++c) {
            const auto value = parse_number(fields[c]);
            if (!value || !std::isfinite(*value)) {
                throw DataError(at_line(path, line) + "field " + std::to_string(c + 1) + " is not a finite number");
            }
            if (c == 0) {
                if (*value != 0.0 && *value != 1.0) throw DataError(at_line(path, line) + "response must be 0 or 1");
                table.y[i] = *value;
            } else {
                table.X(i, static_cast<Eigen::Index>(c - 1)) = *value;
            }
        }
    }
    return table;
}

Vector read_vector_csv(const std::string& path) {
    const RawLines lines = read_lines(path);
    std::vector<double> values;
    for (std::size_t k = 0; k < lines.text.size(); ++k) {
        const auto fields = split(lines.text[k]);
        if (k == 0 && !all_numeric(fields)) continue;
        for (std::string_view f : fields) {
            const auto value = parse_number(f);
            if (!value || !std::isfinite(*value)) {
                throw DataError(at_line(path, lines.number[k]) + "'" + std::string(f) + "' is not a finite number");
            }
            values.push_back(*value);
        }
    }
    if (values.empty()) throw DataError(path + ": no values");
    return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace sparselogit::cli
