#include "csirf/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "csirf/errors.hpp"

namespace csirf::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (lo > hi) {
            lo = 0;
            hi = 1;
        }
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double m = 0.05 * (hi - lo);
        lo -= m;
        hi += m;
    }
};

} // namespace

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series) {
    constexpr double W = 860, H = 520, ml = 70, mr = 170, mt = 50, mb = 60;
    Range xr, yr;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            xr.add(x);
            yr.add(y);
        }
    xr.pad();
    yr.pad();
    const auto px = [&](double x) { return ml + (x - xr.lo) / (xr.hi - xr.lo) * (W - ml - mr); };
    const auto py = [&](double y) { return H - mb - (y - yr.lo) / (yr.hi - yr.lo) * (H - mt - mb); };

    std::ostringstream ss;
    ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W << " " << H
       << "\" font-family=\"sans-serif\">\n";
    ss << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    ss << "<text x=\"" << W / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">"
       << esc(title) << "</text>\n";
    // grid + ticks
    for (int i = 0; i <= 5; ++i) {
        const double fy = yr.lo + (yr.hi - yr.lo) * i / 5.0;
        const double Y = py(fy);
        ss << "<line x1=\"" << ml << "\" y1=\"" << Y << "\" x2=\"" << W - mr << "\" y2=\"" << Y
           << "\" stroke=\"#ddd\"/>\n";
        ss << "<text x=\"" << ml - 8 << "\" y=\"" << Y + 4
           << "\" text-anchor=\"end\" font-size=\"12\">" << fmt(fy) << "</text>\n";
        const double fx = xr.lo + (xr.hi - xr.lo) * i / 5.0;
        const double X = px(fx);
        ss << "<line x1=\"" << X << "\" y1=\"" << mt << "\" x2=\"" << X << "\" y2=\"" << H - mb
           << "\" stroke=\"#eee\"/>\n";
        ss << "<text x=\"" << X << "\" y=\"" << H - mb + 18
           << "\" text-anchor=\"middle\" font-size=\"12\">" << fmt(fx) << "</text>\n";
    }
    ss << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
       << H - mt - mb << "\" fill=\"none\" stroke=\"#444\"/>\n";
    ss << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 16
       << "\" text-anchor=\"middle\" font-size=\"14\">" << esc(x_label) << "</text>\n";
    ss << "<text x=\"20\" y=\"" << (mt + H - mb) / 2
       << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 "
       << (mt + H - mb) / 2 << ")\">" << esc(y_label) << "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % kPaletteSize];
        std::vector<std::pair<double, double>> pts = series[si].points;
        std::sort(pts.begin(), pts.end());
        ss << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : pts) ss << px(x) << "," << py(y) << " ";
        ss << "\"/>\n";
        for (const auto& [x, y] : pts)
            ss << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color
               << "\"/>\n";
        const double ly = mt + 20 + 22 * static_cast<double>(si);
        ss << "<line x1=\"" << W - mr + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - mr + 40
           << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        ss << "<text x=\"" << W - mr + 46 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">"
           << esc(series[si].name) << "</text>\n";
    }
    ss << "</svg>\n";
    return ss.str();
}

std::string box_plot(const std::string& title, const std::string& x_label,
                     const std::vector<Box>& boxes) {
    const double W = 860;
    const double row_h = 44;
    const double mt = 56, mb = 60, ml = 190, mr = 40;
    const double H = mt + mb + row_h * static_cast<double>(boxes.size());
    Range xr;
    for (const auto& b : boxes) {
        xr.add(b.min);
        xr.add(b.max);
    }
    xr.pad();
    const auto px = [&](double x) { return ml + (x - xr.lo) / (xr.hi - xr.lo) * (W - ml - mr); };

    std::ostringstream ss;
    ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W << " " << H
       << "\" font-family=\"sans-serif\">\n";
    ss << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    ss << "<text x=\"" << W / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">"
       << esc(title) << "</text>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = xr.lo + (xr.hi - xr.lo) * i / 5.0;
        const double X = px(fx);
        ss << "<line x1=\"" << X << "\" y1=\"" << mt << "\" x2=\"" << X << "\" y2=\"" << H - mb
           << "\" stroke=\"#eee\"/>\n";
        ss << "<text x=\"" << X << "\" y=\"" << H - mb + 18
           << "\" text-anchor=\"middle\" font-size=\"12\">" << fmt(fx) << "</text>\n";
    }
    for (size_t i = 0; i < boxes.size(); ++i) {
        const auto& b = boxes[i];
        const double cy = mt + row_h * (static_cast<double>(i) + 0.5);
        const double bh = row_h * 0.5;
        const char* color = kPalette[i % kPaletteSize];
        ss << "<text x=\"" << ml - 10 << "\" y=\"" << cy + 4
           << "\" text-anchor=\"end\" font-size=\"12\">" << esc(b.label) << "</text>\n";
        ss << "<line x1=\"" << px(b.min) << "\" y1=\"" << cy << "\" x2=\"" << px(b.q1)
           << "\" y2=\"" << cy << "\" stroke=\"#444\"/>\n";
        ss << "<line x1=\"" << px(b.q3) << "\" y1=\"" << cy << "\" x2=\"" << px(b.max)
           << "\" y2=\"" << cy << "\" stroke=\"#444\"/>\n";
        for (double v : {b.min, b.max})
            ss << "<line x1=\"" << px(v) << "\" y1=\"" << cy - bh / 3 << "\" x2=\"" << px(v)
               << "\" y2=\"" << cy + bh / 3 << "\" stroke=\"#444\"/>\n";
        ss << "<rect x=\"" << px(b.q1) << "\" y=\"" << cy - bh / 2 << "\" width=\""
           << std::max(1.0, px(b.q3) - px(b.q1)) << "\" height=\"" << bh << "\" fill=\"" << color
           << "\" fill-opacity=\"0.35\" stroke=\"" << color << "\"/>\n";
        ss << "<line x1=\"" << px(b.median) << "\" y1=\"" << cy - bh / 2 << "\" x2=\""
           << px(b.median) << "\" y2=\"" << cy + bh / 2 << "\" stroke=\"" << color
           << "\" stroke-width=\"2\"/>\n";
    }
    ss << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 16
       << "\" text-anchor=\"middle\" font-size=\"14\">" << esc(x_label) << "</text>\n";
    ss << "</svg>\n";
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("cannot open for writing: " + path);
    os << content;
    if (!os) throw data_error("write failed: " + path);
}

} // namespace csirf::svg
