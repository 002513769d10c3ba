#ifndef MCN_REPORT_UTIL_HPP
#define MCN_REPORT_UTIL_HPP

#include <string>
#include <vector>

namespace mcn {

/// 17-significant-digit decimal rendering used in every emitted CSV.
std::string csv_number(double v);

/// RFC 4180 rows: comma separated, CRLF line endings, header first.
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);

struct PlotSeries {
    std::string label;
    std::string color;
    std::vector<double> y;  // sampled at k = 0, 1, ...
};

/// Minimal self-contained SVG line plot of sample-indexed series.
std::string svg_line_plot(const std::string& title, const std::vector<PlotSeries>& series);

}  // namespace mcn

#endif
