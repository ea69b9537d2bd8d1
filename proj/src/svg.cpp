#include "n400/svg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <vector>

#include "n400/util.hpp"

namespace n400 {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 60.0;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b"};

struct Scale {
    double lo = 0.0, hi = 1.0, out_lo = 0.0, out_hi = 1.0;
    double operator()(double v) const {
        const double t = hi == lo ? 0.5 : (v - lo) / (hi - lo);
        return out_lo + t * (out_hi - out_lo);
    }
};

void open_svg(std::ostream& os, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
       << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
       << kHeight << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2
       << "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"14\">"
       << title << "</text>\n";
}

void axis_line(std::ostream& os, double x1, double y1, double x2, double y2) {
    os << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\""
       << y2 << "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
}

void text(std::ostream& os, double x, double y, const std::string& s,
          const std::string& anchor = "middle", int size = 11,
          const std::string& extra = "") {
    os << "<text x=\"" << x << "\" y=\"" << y << "\" text-anchor=\"" << anchor
       << "\" font-family=\"sans-serif\" font-size=\"" << size << "\" " << extra
       << ">" << s << "</text>\n";
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

} // namespace

void write_aic_figure(const LadderReport& report, std::ostream& os) {
    // bars: AIC improvement vs baseline for every non-baseline rung
    struct Bar {
        std::string label;
        double value;
        std::size_t group;
    };
    std::vector<Bar> bars;
    std::map<std::string, std::size_t> group_of;
    for (const LadderRung& r : report.rungs) {
        if (r.rung == 0) continue;
        const auto [it, inserted] = group_of.try_emplace(r.ladder, group_of.size());
        bars.push_back({r.ladder + " rung " + std::to_string(r.rung),
                        r.aic_improvement, it->second});
    }

    open_svg(os, "AIC improvement over baseline");
    double lo = 0.0, hi = 1.0;
    for (const Bar& b : bars) {
        lo = std::min(lo, b.value);
        hi = std::max(hi, b.value);
    }
    const Scale sy{lo, hi, kHeight - kMarginBottom, kMarginTop};
    axis_line(os, kMarginLeft, kMarginTop, kMarginLeft, kHeight - kMarginBottom);
    axis_line(os, kMarginLeft, sy(0.0), kWidth - kMarginRight, sy(0.0));
    text(os, kMarginLeft - 8, sy(hi) + 4, short_num(hi), "end");
    text(os, kMarginLeft - 8, sy(lo) + 4, short_num(lo), "end");
    text(os, kMarginLeft - 8, sy(0.0) + 4, "0", "end");

    const double span = kWidth - kMarginLeft - kMarginRight;
    const double step = bars.empty() ? span : span / static_cast<double>(bars.size());
    const double bar_w = std::min(48.0, step * 0.6);
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double cx = kMarginLeft + step * (static_cast<double>(i) + 0.5);
        const double y0 = sy(0.0);
        const double y1 = sy(bars[i].value);
        os << "<rect x=\"" << cx - bar_w / 2 << "\" y=\"" << std::min(y0, y1)
           << "\" width=\"" << bar_w << "\" height=\"" << std::fabs(y1 - y0)
           << "\" fill=\"" << kPalette[bars[i].group % 6] << "\"/>\n";
        text(os, cx, kHeight - kMarginBottom + 16, bars[i].label, "middle", 10);
        text(os, cx, std::min(y0, y1) - 4, short_num(bars[i].value), "middle", 10);
    }
    os << "</svg>\n";
}

void write_conditions_figure(const HoldoutReport& report, std::ostream& os) {
    // condition means with +-1 SE whiskers, one color per series; the y axis
    // is flipped so larger N400 (more negative microvolts) points up
    std::vector<std::string> series{"true"};
    for (const std::string& m : report.model_names) series.push_back(m);
    std::map<std::string, std::size_t> series_index;
    for (std::size_t i = 0; i < series.size(); ++i) series_index[series[i]] = i;

    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const ConditionSummary& s : report.condition_means) {
        const double a = s.mean - 2 * s.se, b = s.mean + 2 * s.se;
        lo = first ? a : std::min(lo, a);
        hi = first ? b : std::max(hi, b);
        first = false;
    }
    if (hi == lo) hi = lo + 1.0;

    open_svg(os, "Held-out amplitude by condition (microvolts, axis reversed)");
    const Scale sy{lo, hi, kMarginTop, kHeight - kMarginBottom}; // reversed
    axis_line(os, kMarginLeft, kMarginTop, kMarginLeft, kHeight - kMarginBottom);
    axis_line(os, kMarginLeft, kHeight - kMarginBottom, kWidth - kMarginRight,
              kHeight - kMarginBottom);
    text(os, kMarginLeft - 8, sy(hi) + 4, short_num(hi), "end");
    text(os, kMarginLeft - 8, sy(lo) + 4, short_num(lo), "end");

    const double span = kWidth - kMarginLeft - kMarginRight;
    const double step = span / 4.0;
    for (std::size_t ci = 0; ci < kConditions.size(); ++ci) {
        const std::string label = to_string(kConditions[ci]);
        const double cx = kMarginLeft + step * (static_cast<double>(ci) + 0.5);
        text(os, cx, kHeight - kMarginBottom + 16, label);
        for (const ConditionSummary& s : report.condition_means) {
            if (s.condition != label) continue;
            const std::size_t si = series_index.at(s.series);
            const double x =
                cx + (static_cast<double>(si) -
                      static_cast<double>(series.size() - 1) / 2.0) *
                         14.0;
            const char* color = kPalette[si % 6];
            axis_line(os, x, sy(s.mean - s.se), x, sy(s.mean + s.se));
            os << "<circle cx=\"" << x << "\" cy=\"" << sy(s.mean)
               << "\" r=\"4\" fill=\"" << color << "\"/>\n";
        }
    }
    for (std::size_t si = 0; si < series.size(); ++si) {
        const double y = kHeight - 18 - 14.0 * static_cast<double>(series.size() - 1 - si);
        os << "<circle cx=\"" << kMarginLeft + 8 << "\" cy=\"" << y - 4
           << "\" r=\"4\" fill=\"" << kPalette[si % 6] << "\"/>\n";
        text(os, kMarginLeft + 18, y, series[si], "start", 11);
    }
    os << "</svg>\n";
}

void write_scatter_figure(const CorrelationReport& report, std::ostream& os) {
    double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
    bool first = true;
    for (const auto& [frame, cond, x, y] : report.scatter) {
        if (first) {
            xlo = xhi = x;
            ylo = yhi = y;
            first = false;
        }
        xlo = std::min(xlo, x);
        xhi = std::max(xhi, x);
        ylo = std::min(ylo, y);
        yhi = std::max(yhi, y);
    }
    if (xhi == xlo) xhi = xlo + 1;
    if (yhi == ylo) yhi = ylo + 1;

    open_svg(os, report.x_column + " vs " + report.y_column);
    const Scale sx{xlo, xhi, kMarginLeft, kWidth - kMarginRight};
    const Scale sy{ylo, yhi, kHeight - kMarginBottom, kMarginTop};
    axis_line(os, kMarginLeft, kMarginTop, kMarginLeft, kHeight - kMarginBottom);
    axis_line(os, kMarginLeft, kHeight - kMarginBottom, kWidth - kMarginRight,
              kHeight - kMarginBottom);
    text(os, kMarginLeft - 8, sy(yhi) + 4, short_num(yhi), "end");
    text(os, kMarginLeft - 8, sy(ylo) + 4, short_num(ylo), "end");
    text(os, sx(xlo), kHeight - kMarginBottom + 16, short_num(xlo));
    text(os, sx(xhi), kHeight - kMarginBottom + 16, short_num(xhi));
    text(os, kWidth / 2, kHeight - kMarginBottom + 32, report.x_column);

    std::map<std::string, std::size_t> cond_index;
    for (std::size_t i = 0; i < kConditions.size(); ++i)
        cond_index[to_string(kConditions[i])] = i;
    for (const auto& [frame, cond, x, y] : report.scatter) {
        const auto it = cond_index.find(cond);
        const char* color = kPalette[(it == cond_index.end() ? 5 : it->second) % 6];
        os << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y)
           << "\" r=\"2.5\" fill=\"" << color << "\" fill-opacity=\"0.6\"/>\n";
    }
    for (const CorrelationEntry& e : report.entries) {
        if (e.group != "overall") continue;
        text(os, kWidth - kMarginRight - 4, kMarginTop + 14,
             "r = " + short_num(e.r) + " (n = " + std::to_string(e.n) + ")", "end",
             12);
    }
    os << "</svg>\n";
}

} // namespace n400
