#include "gwp/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace gwp {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

void write_loglog_svg(std::ostream& os, const std::string& title, const std::vector<PlotSeries>& series,
                      const std::vector<double>& reference_slopes) {
    const double W = 720, H = 480, left = 80, right = 200, top = 40, bottom = 60;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
            xmin = std::min(xmin, std::log10(s.x[i]));
            xmax = std::max(xmax, std::log10(s.x[i]));
            ymin = std::min(ymin, std::log10(s.y[i]));
            ymax = std::max(ymax, std::log10(s.y[i]));
        }
    if (!std::isfinite(xmin)) xmin = -1, xmax = 0, ymin = -1, ymax = 0;
    if (xmax - xmin < 1e-9) xmin -= 0.5, xmax += 0.5;
    if (ymax - ymin < 1e-9) ymin -= 0.5, ymax += 0.5;
    xmin = std::floor(xmin * 2) / 2;
    xmax = std::ceil(xmax * 2) / 2;
    ymin = std::floor(ymin);
    ymax = std::ceil(ymax);
    const double pw = W - left - right, ph = H - top - bottom;
    auto px = [&](double lx) { return left + (lx - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double ly) { return top + (ymax - ly) / (ymax - ymin) * ph; };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double ly = ymin; ly <= ymax + 1e-9; ly += 1.0) {
        os << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << fmt(py(ly)) << "\" y2=\"" << fmt(py(ly))
           << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << left - 8 << "\" y=\"" << fmt(py(ly) + 4) << "\" text-anchor=\"end\">1e" << int(ly)
           << "</text>\n";
    }
    for (double lx = xmin; lx <= xmax + 1e-9; lx += 0.5) {
        os << "<line y1=\"" << top << "\" y2=\"" << top + ph << "\" x1=\"" << fmt(px(lx)) << "\" x2=\"" << fmt(px(lx))
           << "\" stroke=\"#eee\"/>\n";
        os << "<text x=\"" << fmt(px(lx)) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << fmt(std::pow(10.0, lx))
           << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">eps</text>\n";

    if (!series.empty() && !series.front().x.empty()) {
        const double x0 = std::log10(series.front().x.front()), y0 = std::log10(series.front().y.front());
        int r = 0;
        for (double slope : reference_slopes) {
            const double xa = xmin, xb = xmax;
            os << "<line x1=\"" << fmt(px(xa)) << "\" y1=\"" << fmt(py(y0 + slope * (xa - x0))) << "\" x2=\"" << fmt(px(xb))
               << "\" y2=\"" << fmt(py(y0 + slope * (xb - x0))) << "\" stroke=\"#555\" stroke-dasharray=\""
               << (r ? "2,4" : "8,4") << "\" clip-path=\"url(#plot)\"/>\n";
            os << "<text x=\"" << left + pw + 10 << "\" y=\"" << top + 16 * (series.size() + r + 1) << "\">- - slope "
               << fmt(slope) << "</text>\n";
            ++r;
        }
    }
    os << "<clipPath id=\"plot\"><rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\"/></clipPath>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* c = kColors[k % 8];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
            const double X = px(std::log10(s.x[i])), Y = py(std::log10(s.y[i]));
            pts += fmt(X) + "," + fmt(Y) + " ";
            os << "<circle cx=\"" << fmt(X) << "\" cy=\"" << fmt(Y) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
        }
        os << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << c << "\"/>\n";
        os << "<text x=\"" << left + pw + 10 << "\" y=\"" << top + 16 * (k + 1) << "\" fill=\"" << c << "\">" << s.label
           << "</text>\n";
    }
    os << "</svg>\n";
}

} // namespace gwp
