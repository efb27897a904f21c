#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "layerctl/report.hpp"

namespace layerctl::report {

namespace {

constexpr double width = 640.0, height = 420.0;
constexpr double margin_left = 70.0, margin_right = 20.0, margin_top = 30.0, margin_bottom = 50.0;

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

struct Axis {
    bool log = false;
    double lo = 0.0, hi = 1.0;
    double map(double v, double p0, double p1) const {
        const double t = log ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
        return p0 + t * (p1 - p0);
    }
};

Axis make_axis(const std::vector<double>& vals, bool log) {
    Axis a;
    a.log = log;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : vals) {
        const double w = log ? std::log10(v) : v;
        lo = std::min(lo, w);
        hi = std::max(hi, w);
    }
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    a.lo = lo;
    a.hi = hi;
    return a;
}

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

}  // namespace

double plot_slope(const csv::Table& series, const std::string& style) {
    if (series.columns().size() < 2 || series.empty()) throw PreconditionError("plot_slope: need rows and a y column");
    const bool log = style == "loglog";
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (const auto& row : series.rows()) {
        if (!usable(row[0], log) || !usable(row[1], log)) continue;
        const double x = log ? std::log(row[0]) : row[0];
        const double y = log ? std::log(row[1]) : row[1];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw PreconditionError("plot_slope: fewer than two usable points");
    const double dn = static_cast<double>(n);
    const double den = dn * sxx - sx * sx;
    if (den == 0.0) throw PreconditionError("plot_slope: degenerate abscissae");
    return (dn * sxy - sx * sy) / den;
}

std::string emit_plot(const csv::Table& series, const PlotOptions& opt) {
    if (opt.style != "loglog" && opt.style != "linear")
        throw PreconditionError("emit_plot: style must be loglog or linear");
    if (series.empty()) throw PreconditionError("emit_plot: empty series");
    const auto& cols = series.columns();
    if (cols.size() < 2) throw PreconditionError("emit_plot: need at least one y column");
    const bool log = opt.style == "loglog";
    for (const auto& row : series.rows())
        for (double v : row)
            if (!std::isfinite(v)) throw PreconditionError("emit_plot: non-finite cell");

    std::vector<double> xs, ys;
    for (const auto& row : series.rows()) {
        if (usable(row[0], log)) xs.push_back(row[0]);
        for (std::size_t c = 1; c < row.size(); ++c)
            if (usable(row[c], log)) ys.push_back(row[c]);
    }
    if (xs.empty() || ys.empty()) throw PreconditionError("emit_plot: no plottable values for this style");
    const Axis ax = make_axis(xs, log), ay = make_axis(ys, log);
    const double px0 = margin_left, px1 = width - margin_right;
    const double py0 = height - margin_bottom, py1 = margin_top;

    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    s << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    if (!opt.title.empty())
        s << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << escape(opt.title)
          << "</text>\n";

    // Axes and ticks drawn as lines so each data column owns exactly one path element.
    s << "<g stroke=\"black\" stroke-width=\"1\">\n";
    s << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px1 << "\" y2=\"" << py0 << "\"/>\n";
    s << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px0 << "\" y2=\"" << py1 << "\"/>\n";
    s << "</g>\n<g font-size=\"11\" font-family=\"sans-serif\">\n";
    constexpr int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        const double f = static_cast<double>(i) / ticks;
        const double vx = ax.lo + f * (ax.hi - ax.lo), vy = ay.lo + f * (ay.hi - ay.lo);
        const double X = px0 + f * (px1 - px0), Y = py0 + f * (py1 - py0);
        const std::string lx = log ? fmt("%.3g", std::pow(10.0, vx)) : fmt("%.3g", vx);
        const std::string ly = log ? fmt("%.3g", std::pow(10.0, vy)) : fmt("%.3g", vy);
        s << "<line x1=\"" << X << "\" y1=\"" << py0 << "\" x2=\"" << X << "\" y2=\"" << py0 + 5
          << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << X << "\" y=\"" << py0 + 18 << "\" text-anchor=\"middle\">" << escape(lx) << "</text>\n";
        s << "<line x1=\"" << px0 - 5 << "\" y1=\"" << Y << "\" x2=\"" << px0 << "\" y2=\"" << Y
          << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << px0 - 8 << "\" y=\"" << Y + 4 << "\" text-anchor=\"end\">" << escape(ly) << "</text>\n";
    }
    s << "<text x=\"" << (px0 + px1) / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">"
      << escape(cols[0]) << "</text>\n";
    s << "</g>\n";

    for (std::size_t c = 1; c < cols.size(); ++c) {
        std::ostringstream d;
        bool pen = false;
        for (const auto& row : series.rows()) {
            if (!usable(row[0], log) || !usable(row[c], log)) {
                pen = false;
                continue;
            }
            d << (pen ? " L " : (d.tellp() > 0 ? " M " : "M ")) << fmt("%.2f", ax.map(row[0], px0, px1)) << ' '
              << fmt("%.2f", ay.map(row[c], py0, py1));
            pen = true;
        }
        const char* color = palette[(c - 1) % (sizeof palette / sizeof palette[0])];
        s << "<path d=\"" << d.str() << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\"><title>" << escape(cols[c]) << "</title></path>\n";
        s << "<text x=\"" << px1 - 4 << "\" y=\"" << margin_top + 14.0 * static_cast<double>(c)
          << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color << "\">" << escape(cols[c]) << "</text>\n";
    }

    if (opt.annotate_slope) {
        const double slope = plot_slope(series, opt.style);
        s << "<text x=\"" << px0 + 10 << "\" y=\"" << margin_top + 14
          << "\" font-size=\"12\" class=\"slope\" data-slope=\"" << csv::format_number(slope) << "\">"
          << escape("slope = " + fmt("%.3f", slope)) << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace layerctl::report
