#include "idrank/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "idrank/error.hpp"

namespace idrank {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_row(std::string_view line, std::vector<double>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        const auto field = trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        double v = 0.0;
        const char* first = field.data();
        if (!field.empty() && field.front() == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, field.data() + field.size(), v);
        if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) return false;
        out.push_back(v);
        if (comma == std::string_view::npos) return true;
        start = comma + 1;
    }
}

}  // namespace

PointCloud parse_csv_cloud(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

    std::vector<double> data;
    std::vector<double> row;
    std::size_t dim = 0;
    std::size_t line_no = 0;
    bool first_content = true;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        const auto line = trim(text.substr(0, nl));
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;
        if (line.empty()) continue;

        const bool ok = parse_row(line, row);
        if (first_content) {
            first_content = false;
            if (!ok) continue;  // header
        }
        if (!ok) {
            fail(ErrorCode::FormatError, "CSV line " + std::to_string(line_no) + ": unparsable field");
        }
        if (dim == 0) {
            dim = row.size();
        } else if (row.size() != dim) {
            fail(ErrorCode::FormatError, "CSV line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(dim) + " columns, got " + std::to_string(row.size()));
        }
        data.insert(data.end(), row.begin(), row.end());
    }
    if (dim == 0) fail(ErrorCode::FormatError, "CSV holds no numeric rows");
    return PointCloud(dim, std::move(data));
}

PointCloud read_csv_cloud(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv_cloud(buf.str());
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_csv_cloud(std::ostream& out, const PointCloud& cloud) {
    for (std::size_t i = 0; i < cloud.n_points(); ++i) {
        auto p = cloud.point(i);
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (k) out << ',';
            out << format_double(p[k]);
        }
        out << '\n';
    }
}

void write_csv_curve(std::ostream& out, std::span<const CurvePoint> curve) {
    out << "log_mu,neg_log_survival\n";
    for (const auto& p : curve) {
        out << format_double(p.log_mu) << ',' << format_double(p.neg_log_survival) << '\n';
    }
}

}  // namespace idrank
