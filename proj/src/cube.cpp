#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "tonelut/error.hpp"
#include "tonelut/formats.hpp"

namespace tonelut {

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
    fail(ErrorCode::parse, "line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

double to_double(std::string_view token, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) {
        parse_error(line, "expected a number, found '" + std::string(token) + "'");
    }
    return v;
}

Rgb parse_triple(const std::vector<std::string_view>& tokens, std::size_t first, std::size_t line) {
    if (tokens.size() != first + 3) parse_error(line, "expected three values");
    return {to_double(tokens[first], line), to_double(tokens[first + 1], line), to_double(tokens[first + 2], line)};
}

}  // namespace

Lut3D rebake_uniform(const Lut3D& lut, const SamplingCoordinates& coords) {
    const int n = lut.size();
    if (coords == SamplingCoordinates::uniform(n)) return lut;
    const Lut3D grid = make_identity(n);
    const ImageBuffer inputs(static_cast<int>(grid.entry_count()), 1,
                             std::vector<Rgb>(grid.values().begin(), grid.values().end()));
    const ImageBuffer baked = lookup(lut, coords, inputs);
    return Lut3D(n, std::vector<Rgb>(baked.pixels().begin(), baked.pixels().end()));
}

std::string format_cube(const Lut3D& lut, const SamplingCoordinates& coords, const std::string& title) {
    const Lut3D uniform = rebake_uniform(lut, coords);
    std::string out;
    if (!title.empty()) out += "TITLE \"" + title + "\"\n";
    out += "LUT_3D_SIZE " + std::to_string(uniform.size()) + "\n";
    out += "DOMAIN_MIN 0 0 0\nDOMAIN_MAX 1 1 1\n";
    char row[96];
    for (const Rgb& v : uniform.values()) {
        std::snprintf(row, sizeof row, "%.6f %.6f %.6f\n", v[0], v[1], v[2]);
        out += row;
    }
    return out;
}

void write_cube(const Lut3D& lut, const SamplingCoordinates& coords, const std::filesystem::path& path,
                const std::string& title) {
    write_file_atomic(path, format_cube(lut, coords, title));
}

CubeFile parse_cube(std::string_view text) {
    CubeFile cube;
    int size = 0;
    std::size_t size_line = 0;
    std::vector<Rgb> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const auto tokens = split_ws(line);
        if (tokens.empty() || tokens.front().starts_with('#')) {
            if (end == text.size()) break;
            continue;
        }
        const std::string_view key = tokens.front();
        if (key == "TITLE") {
            const auto open = line.find('"');
            const auto close = line.rfind('"');
            if (open == std::string_view::npos || close == open) parse_error(line_no, "TITLE needs a quoted string");
            cube.title = std::string(line.substr(open + 1, close - open - 1));
        } else if (key == "LUT_3D_SIZE") {
            if (tokens.size() != 2) parse_error(line_no, "LUT_3D_SIZE takes one value");
            const auto [ptr, ec] = std::from_chars(tokens[1].data(), tokens[1].data() + tokens[1].size(), size);
            if (ec != std::errc() || ptr != tokens[1].data() + tokens[1].size()) {
                parse_error(line_no, "invalid LUT_3D_SIZE '" + std::string(tokens[1]) + "'");
            }
            if (size < 2) fail(ErrorCode::format, "line " + std::to_string(line_no) + ": LUT_3D_SIZE must be >= 2");
            if (size > 256) fail(ErrorCode::format, "line " + std::to_string(line_no) + ": LUT_3D_SIZE above 256");
            size_line = line_no;
        } else if (key == "DOMAIN_MIN") {
            cube.domain_min = parse_triple(tokens, 1, line_no);
        } else if (key == "DOMAIN_MAX") {
            cube.domain_max = parse_triple(tokens, 1, line_no);
        } else if (key == "LUT_1D_SIZE" || key == "LUT_1D_INPUT_RANGE" || key == "LUT_3D_INPUT_RANGE") {
            fail(ErrorCode::format, "line " + std::to_string(line_no) + ": unsupported keyword " + std::string(key));
        } else {
            if (size == 0) parse_error(line_no, "data row before LUT_3D_SIZE");
            if (rows.size() == static_cast<std::size_t>(size) * size * size) {
                parse_error(line_no, "more than " + std::to_string(rows.size()) + " data rows");
            }
            rows.push_back(parse_triple(tokens, 0, line_no));
        }
        if (end == text.size()) break;
    }
    if (size == 0) parse_error(line_no, "missing LUT_3D_SIZE");
    const std::size_t expected = static_cast<std::size_t>(size) * size * size;
    if (rows.size() != expected) {
        parse_error(line_no, "LUT_3D_SIZE " + std::to_string(size) + " (line " + std::to_string(size_line) +
                                 ") needs " + std::to_string(expected) + " data rows, found " +
                                 std::to_string(rows.size()));
    }
    for (int c = 0; c < 3; ++c) {
        if (!(cube.domain_min[c] < cube.domain_max[c])) parse_error(line_no, "DOMAIN_MIN must be below DOMAIN_MAX");
    }
    cube.lut = Lut3D(size, std::move(rows));
    return cube;
}

CubeFile read_cube(const std::filesystem::path& path) { return parse_cube(read_file(path)); }

}  // namespace tonelut
