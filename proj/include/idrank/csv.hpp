#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>

#include "idrank/point_cloud.hpp"
#include "idrank/twonn.hpp"

namespace idrank {

/// One point per row, comma-separated, '.' decimal separator. A first row
/// that does not parse as numbers is taken as a header. Blank lines are
/// skipped. Throws FormatError on ragged rows or unparsable fields.
PointCloud parse_csv_cloud(std::string_view text);
PointCloud read_csv_cloud(const std::filesystem::path& path);

/// Shortest round-trip decimal form; no header.
void write_csv_cloud(std::ostream& out, const PointCloud& cloud);

/// "log_mu,neg_log_survival" header followed by the fit points.
void write_csv_curve(std::ostream& out, std::span<const CurvePoint> curve);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

}  // namespace idrank
