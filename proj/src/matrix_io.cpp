#include "serialforge/matrix_io.hpp"

#include "serialforge/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace serialforge {

namespace {

std::size_t line_of_offset(std::string_view text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

template <typename T>
T require(const nlohmann::json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field \"") + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError(std::string("field \"") + key + "\" has the wrong type");
    }
}

unsigned narrowest_width(std::int64_t lo, std::int64_t hi, Signedness s)
{
    for (unsigned w = 1; w <= kMaxBitwidth; ++w)
        if (lo >= min_representable(w, s) && hi <= max_representable(w, s)) return w;
    throw ArgumentError("matrix entries exceed " + std::to_string(kMaxBitwidth) + " bits");
}

IntMatrix parse_matrix_market(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;

    std::getline(in, line);
    ++line_no;
    {
        std::istringstream banner(line);
        std::string tag, object, format, field, symmetry;
        banner >> tag >> object >> format >> field >> symmetry;
        auto lower = [](std::string s) {
            std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
            return s;
        };
        if (lower(object) != "matrix" || lower(format) != "coordinate" || lower(field) != "integer"
            || lower(symmetry) != "general")
            throw ParseError("only 'matrix coordinate integer general' Matrix Market files are supported",
                             line_no);
    }

    auto next_content_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '%') continue;
            return true;
        }
        return false;
    };

    if (!next_content_line()) throw ParseError("missing size line", line_no);
    long long rows = 0, cols = 0, nnz = 0;
    {
        std::istringstream size_line(line);
        if (!(size_line >> rows >> cols >> nnz) || rows <= 0 || cols <= 0 || nnz < 0)
            throw ParseError("malformed size line", line_no);
    }

    const auto r_count = static_cast<std::size_t>(rows);
    const auto c_count = static_cast<std::size_t>(cols);
    std::vector<std::int64_t> data(r_count * c_count, 0);
    std::int64_t lo = 0, hi = 0;
    for (long long e = 0; e < nnz; ++e) {
        if (!next_content_line()) throw ParseError("expected " + std::to_string(nnz) + " entries", line_no);
        std::istringstream entry(line);
        long long i = 0, j = 0;
        std::int64_t v = 0;
        if (!(entry >> i >> j >> v)) throw ParseError("malformed entry", line_no);
        if (i < 1 || i > rows || j < 1 || j > cols) throw ParseError("entry index out of range", line_no);
        if (v < -(std::int64_t{1} << 31) || v > (std::int64_t{1} << 32) - 1)
            throw ParseError("entry value out of 32-bit range", line_no);
        data[static_cast<std::size_t>(i - 1) * c_count + static_cast<std::size_t>(j - 1)] = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const Signedness s = lo < 0 ? Signedness::Signed : Signedness::Unsigned;
    return IntMatrix(r_count, c_count, narrowest_width(lo, hi, s), s, std::move(data));
}

}  // namespace

nlohmann::json parse_json(std::string_view text)
{
    try {
        return nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1));
    }
}

nlohmann::json matrix_to_json(const IntMatrix& m)
{
    return nlohmann::json{{"rows", m.rows()},
                          {"cols", m.cols()},
                          {"bitwidth", m.bitwidth()},
                          {"signed", m.is_signed()},
                          {"data", std::vector<std::int64_t>(m.data().begin(), m.data().end())}};
}

IntMatrix matrix_from_json(const nlohmann::json& j)
{
    const auto rows = require<std::int64_t>(j, "rows");
    const auto cols = require<std::int64_t>(j, "cols");
    const auto bitwidth = require<std::int64_t>(j, "bitwidth");
    const auto is_signed = require<bool>(j, "signed");
    auto data = require<std::vector<std::int64_t>>(j, "data");
    if (rows <= 0 || cols <= 0) throw ParseError("rows and cols must be positive");
    if (bitwidth < 1 || bitwidth > static_cast<std::int64_t>(kMaxBitwidth))
        throw ParseError("bitwidth must be in [1, 32]");
    // Range violations surface as ArgumentError from the constructor.
    return IntMatrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                     static_cast<unsigned>(bitwidth), is_signed ? Signedness::Signed : Signedness::Unsigned,
                     std::move(data));
}

IntMatrix parse_matrix(std::string_view text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text.substr(first).starts_with("%%MatrixMarket"))
        return parse_matrix_market(text.substr(first));
    return matrix_from_json(parse_json(text));
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

IntMatrix read_matrix(const std::filesystem::path& path) { return parse_matrix(read_text_file(path)); }

void write_matrix(const IntMatrix& m, const std::filesystem::path& path)
{
    write_text_file(path, matrix_to_json(m).dump() + "\n");
}

}  // namespace serialforge
