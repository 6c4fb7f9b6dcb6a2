#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gwp {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Log-log scatter/line plot with dashed reference lines of the given slopes anchored at the
/// first point of the first series.
void write_loglog_svg(std::ostream& os, const std::string& title, const std::vector<PlotSeries>& series,
                      const std::vector<double>& reference_slopes);

} // namespace gwp
