#include "slz/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace slz {

std::string format_number(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("cannot format a non-finite number");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

double parse_number(std::string_view text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc{} || res.ptr != end || text.empty()) {
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    }
    return v;
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].find_first_of(",\n\r") != std::string::npos) {
            throw std::invalid_argument("CSV cell contains a separator: '" + cells[i] + "'");
        }
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

std::size_t CsvTable::column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::invalid_argument("CSV has no column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(std::string_view name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::string& source_name) {
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw std::invalid_argument(source_name + ": row " + std::to_string(line_no) + " has " +
                                        std::to_string(cells.size()) + " cells, header has " +
                                        std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(cells));
        t.line_numbers.push_back(line_no);
    }
    if (t.header.empty()) throw std::invalid_argument(source_name + ": empty CSV");
    return t;
}

double ChartFrame::px(double x) const {
    return left + (x - x_min) / (x_max - x_min) * (right - left);
}

double ChartFrame::py(double y) const {
    return bottom - (y - y_min) / (y_max - y_min) * (bottom - top);
}

ChartFrame chart_frame(const ChartSpec& spec, const std::vector<ChartSeries>& series) {
    ChartFrame f{70.0, spec.width - 160.0, 40.0, spec.height - 50.0, 0, 0, 0, 0};
    bool any = false;
    for (const auto& s : series) {
        for (const auto& p : s.points) {
            if (!any) {
                f.x_min = f.x_max = p.x;
                f.y_min = f.y_max = p.y;
                any = true;
            }
            f.x_min = std::min(f.x_min, p.x);
            f.x_max = std::max(f.x_max, p.x);
            f.y_min = std::min(f.y_min, p.y);
            f.y_max = std::max(f.y_max, p.y);
        }
    }
    if (!any) throw std::invalid_argument("chart has no data points");
    if (f.x_max == f.x_min) {
        f.x_min -= 1.0;
        f.x_max += 1.0;
    }
    if (f.y_max == f.y_min) {
        f.y_min -= 0.5;
        f.y_max += 0.5;
    }
    return f;
}

namespace {

std::string escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fixed(double v, int digits) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
    return std::string(buf, res.ptr);
}

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::string render_line_chart(const ChartSpec& spec, const std::vector<ChartSeries>& series) {
    const ChartFrame f = chart_frame(spec, series);
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(spec.width, 0)
        << "\" height=\"" << fixed(spec.height, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text class=\"title\" x=\"" << fixed(spec.width / 2, 1) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << escape(spec.title) << "</text>\n";
    svg << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n"
        << "<line x1=\"" << fixed(f.left, 2) << "\" y1=\"" << fixed(f.bottom, 2) << "\" x2=\""
        << fixed(f.right, 2) << "\" y2=\"" << fixed(f.bottom, 2) << "\"/>\n"
        << "<line x1=\"" << fixed(f.left, 2) << "\" y1=\"" << fixed(f.top, 2) << "\" x2=\""
        << fixed(f.left, 2) << "\" y2=\"" << fixed(f.bottom, 2) << "\"/>\n</g>\n";

    svg << "<g class=\"ticks\">\n";
    constexpr int kTicks = 5;
    for (int i = 0; i <= kTicks; ++i) {
        const double xv = f.x_min + (f.x_max - f.x_min) * i / kTicks;
        const double yv = f.y_min + (f.y_max - f.y_min) * i / kTicks;
        svg << "<text x=\"" << fixed(f.px(xv), 2) << "\" y=\"" << fixed(f.bottom + 16, 2)
            << "\" text-anchor=\"middle\">" << fixed(xv, 2) << "</text>\n";
        svg << "<text x=\"" << fixed(f.left - 6, 2) << "\" y=\"" << fixed(f.py(yv) + 4, 2)
            << "\" text-anchor=\"end\">" << fixed(yv, 3) << "</text>\n";
    }
    svg << "</g>\n";
    svg << "<text class=\"x-label\" x=\"" << fixed((f.left + f.right) / 2, 2) << "\" y=\""
        << fixed(spec.height - 12, 2) << "\" text-anchor=\"middle\">" << escape(spec.x_label)
        << "</text>\n";
    svg << "<text class=\"y-label\" transform=\"translate(16," << fixed((f.top + f.bottom) / 2, 2)
        << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y_label) << "</text>\n";

    std::size_t legend_row = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = kColors[i % std::size(kColors)];
        svg << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t j = 0; j < s.points.size(); ++j) {
            if (j) svg << ' ';
            svg << fixed(f.px(s.points[j].x), 2) << ',' << fixed(f.py(s.points[j].y), 2);
        }
        svg << "\"/>\n";
        if (s.name.empty()) continue;
        const double ly = f.top + 18.0 * static_cast<double>(legend_row++);
        svg << "<g class=\"legend\"><line x1=\"" << fixed(f.right + 12, 2) << "\" y1=\"" << fixed(ly, 2)
            << "\" x2=\"" << fixed(f.right + 32, 2) << "\" y2=\"" << fixed(ly, 2) << "\" stroke=\""
            << color << "\" stroke-width=\"2\"/><text x=\"" << fixed(f.right + 38, 2) << "\" y=\""
            << fixed(ly + 4, 2) << "\">" << escape(s.name) << "</text></g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::vector<ChartSeries> series_from_csv(const CsvTable& table, std::string_view x_column,
                                         std::string_view y_column,
                                         std::optional<std::string_view> group_column) {
    const std::size_t xi = table.column(x_column);
    const std::size_t yi = table.column(y_column);
    const std::optional<std::size_t> gi =
        group_column ? std::optional<std::size_t>(table.column(*group_column)) : std::nullopt;
    std::vector<ChartSeries> out;
    std::map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row[yi].empty()) continue;
        const std::string name = gi ? row[*gi] : std::string(y_column);
        auto [it, inserted] = index.emplace(name, out.size());
        if (inserted) out.push_back({name, {}});
        try {
            out[it->second].points.push_back({parse_number(row[xi]), parse_number(row[yi])});
        } catch (const std::invalid_argument& e) {
            const std::size_t line = r < table.line_numbers.size() ? table.line_numbers[r] : r + 2;
            throw std::invalid_argument("row " + std::to_string(line) + ": " + e.what());
        }
    }
    return out;
}

std::vector<ChartSeries> average_by_x(const std::vector<ChartSeries>& series) {
    std::vector<ChartSeries> out;
    for (const auto& s : series) {
        ChartSeries avg{s.name, {}};
        std::vector<std::size_t> counts;
        std::map<double, std::size_t> slot;
        for (const auto& p : s.points) {
            auto [it, inserted] = slot.emplace(p.x, avg.points.size());
            if (inserted) {
                avg.points.push_back({p.x, 0.0});
                counts.push_back(0);
            }
            avg.points[it->second].y += p.y;
            ++counts[it->second];
        }
        for (std::size_t i = 0; i < avg.points.size(); ++i) {
            avg.points[i].y /= static_cast<double>(counts[i]);
        }
        out.push_back(std::move(avg));
    }
    return out;
}

}  // namespace slz
