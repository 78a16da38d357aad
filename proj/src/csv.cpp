#include "aquastream/csv.hpp"

#include "aquastream/error.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>

namespace aquastream::csv {

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t comma = line.find(',', start);
        std::string_view field =
            comma == std::string_view::npos ? line.substr(start) : line.substr(start, comma - start);
        // trim surrounding whitespace
        size_t b = field.find_first_not_of(" \t\r");
        size_t e = field.find_last_not_of(" \t\r");
        out.emplace_back(b == std::string_view::npos ? "" : field.substr(b, e - b + 1));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_value(std::string_view text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        // from_chars accepts "inf"/"nan" spellings; separate the two error kinds
        std::string lowered(text);
        for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (lowered == "inf" || lowered == "+inf" || lowered == "-inf" || lowered == "infinity" ||
            lowered == "+infinity" || lowered == "-infinity" || lowered == "nan")
            raise(Errc::non_finite_value, "non-finite value '" + std::string(text) + "'");
        raise(Errc::parse_error, "bad number '" + std::string(text) + "'");
    }
    if (!std::isfinite(v)) raise(Errc::non_finite_value, "non-finite value '" + std::string(text) + "'");
    return v;
}

std::string format_value(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

bool looks_like_header(const std::vector<std::string>& fields) {
    for (const auto& f : fields) {
        if (f.empty()) return true;
        char c = f[0];
        bool numberish = (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.';
        if (!numberish) return true;
    }
    return false;
}

std::vector<Row> read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open " + path.string());
    std::vector<Row> rows;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line);
        if (first) {
            first = false;
            if (looks_like_header(fields)) continue;
        }
        rows.push_back(Row{line_no, std::move(fields)});
    }
    return rows;
}

} // namespace aquastream::csv
