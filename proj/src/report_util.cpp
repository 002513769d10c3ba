#include "report_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace mcn {

std::string csv_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream os;
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) os << ",";
        os << header[i];
    }
    os << "\r\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) os << ",";
            os << row[i];
        }
        os << "\r\n";
    }
    return os.str();
}

std::string svg_line_plot(const std::string& title, const std::vector<PlotSeries>& series) {
    const int width = 800, height = 480;
    const int ml = 60, mr = 20, mt = 40, mb = 40;
    const double plot_w = width - ml - mr;
    const double plot_h = height - mt - mb;

    size_t n = 1;
    double lo = 0.0, hi = 1.0;
    bool first = true;
    for (const auto& s : series) {
        n = std::max(n, s.y.size());
        for (double v : s.y) {
            if (first) {
                lo = hi = v;
                first = false;
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (hi - lo < 1e-12) {
        hi += 1.0;
        lo -= 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    auto xo = [&](size_t k) {
        return ml + plot_w * (n > 1 ? static_cast<double>(k) / static_cast<double>(n - 1) : 0.5);
    };
    auto yo = [&](double v) { return mt + plot_h * (1.0 - (v - lo) / (hi - lo)); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << " " << height
       << "\">\n";
    os << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"16\">"
       << title << "</text>\n";

    // axes and horizontal grid
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
       << height - mb << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
       << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = lo + (hi - lo) * i / 4.0;
        const double y = yo(v);
        os << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << width - mr << "\" y2=\"" << y
           << "\" stroke=\"#dddddd\"/>\n";
        char label[32];
        std::snprintf(label, sizeof(label), "%.4g", v);
        os << "<text x=\"" << ml - 6 << "\" y=\"" << y + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label
           << "</text>\n";
    }
    for (size_t k = 0; k < n; k += std::max<size_t>(1, (n - 1) / 8)) {
        os << "<text x=\"" << xo(k) << "\" y=\"" << height - mb + 16
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << k
           << "</text>\n";
    }

    int legend_y = mt + 6;
    for (const auto& s : series) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (size_t k = 0; k < s.y.size(); ++k) {
            os << xo(k) << "," << yo(s.y[k]) << " ";
        }
        os << "\"/>\n";
        os << "<rect x=\"" << width - mr - 130 << "\" y=\"" << legend_y - 9
           << "\" width=\"12\" height=\"4\" fill=\"" << s.color << "\"/>\n";
        os << "<text x=\"" << width - mr - 112 << "\" y=\"" << legend_y
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
        legend_y += 16;
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace mcn
