#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slz {

/// Shortest round-trip decimal form, always with '.' as separator.
std::string format_number(double value);
double parse_number(std::string_view text);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}
    void row(const std::vector<std::string>& cells);

private:
    std::ostream& out_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  ///< 1-based source line of each row

    /// Throws when the column is missing.
    std::size_t column(std::string_view name) const;
    bool has_column(std::string_view name) const;
};

/// Plain comma-separated values with a header row; no quoting. Errors name
/// the source and the 1-based line.
CsvTable read_csv(std::istream& in, const std::string& source_name);

struct ChartPoint {
    double x = 0.0;
    double y = 0.0;
};

struct ChartSeries {
    std::string name;
    std::vector<ChartPoint> points;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    double width = 640.0;
    double height = 400.0;
};

/// Pixel-space layout shared by the renderer and its tests.
struct ChartFrame {
    double left, right, top, bottom;
    double x_min, x_max, y_min, y_max;

    double px(double x) const;
    double py(double y) const;  ///< larger data y maps to smaller pixel y
};

ChartFrame chart_frame(const ChartSpec& spec, const std::vector<ChartSeries>& series);

/// Self-contained SVG line chart: one polyline per series, one legend entry
/// per named series.
std::string render_line_chart(const ChartSpec& spec, const std::vector<ChartSeries>& series);

/// Groups CSV rows into series by `group_column` (or one series named after
/// `y_column`). Rows whose y cell is empty are skipped.
std::vector<ChartSeries> series_from_csv(const CsvTable& table, std::string_view x_column,
                                         std::string_view y_column,
                                         std::optional<std::string_view> group_column = {});

/// Averages y over rows sharing (group, x), keeping x order of first appearance.
std::vector<ChartSeries> average_by_x(const std::vector<ChartSeries>& series);

}  // namespace slz
