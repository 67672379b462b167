#include "stpr/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace stpr {

double curve_tpr_at_fpr(const RocCurve& curve, double fpr) {
    const auto& pts = curve.points;
    if (pts.size() < 2) throw std::invalid_argument("curve has fewer than two points");
    // Points are ordered with FPR nondecreasing; take the highest TPR at or
    // below the requested FPR, interpolating across the bracketing segment.
    double best = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const auto& a = pts[i - 1];
        const auto& b = pts[i];
        if (b.fpr <= fpr) {
            best = std::max(best, b.tpr);
            continue;
        }
        if (a.fpr <= fpr && b.fpr > a.fpr) {
            const double w = (fpr - a.fpr) / (b.fpr - a.fpr);
            best = std::max(best, a.tpr + w * (b.tpr - a.tpr));
        }
        break;
    }
    return best;
}

namespace {

constexpr double kSize = 480.0;    // plot area is square
constexpr double kMargin = 60.0;

double px(double x) { return kMargin + x * kSize; }
double py(double y) { return kMargin + (1.0 - y) * kSize; }

const char* kPalette[] = {"#2a9d3c", "#d62728", "#1f77b4", "#9467bd",
                          "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

void plot_roc(const std::vector<LabeledCurve>& curves, double t_marker,
              const std::string& out_path) {
    if (curves.empty()) throw std::invalid_argument("no curves to plot");
    if (!(t_marker > 0.0 && t_marker < 1.0))
        throw std::invalid_argument("t marker must lie in (0,1)");

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write file: " + out_path);

    const double w = kSize + 2.0 * kMargin;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
        << w << "\" viewBox=\"0 0 " << w << ' ' << w << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Frame and gridline ticks every 0.2.
    out << "<rect x=\"" << px(0) << "\" y=\"" << py(1) << "\" width=\"" << kSize
        << "\" height=\"" << kSize << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double v = 0.2 * i;
        out << "<text x=\"" << px(v) << "\" y=\"" << py(0) + 20
            << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt(v) << "</text>\n";
        out << "<text x=\"" << px(0) - 8 << "\" y=\"" << py(v) + 4
            << "\" font-size=\"12\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
    }
    out << "<text x=\"" << px(0.5) << "\" y=\"" << py(0) + 42
        << "\" font-size=\"14\" text-anchor=\"middle\">False positive rate</text>\n";
    out << "<text x=\"" << px(0) - 42 << "\" y=\"" << py(0.5)
        << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 "
        << px(0) - 42 << ' ' << py(0.5) << ")\">True positive rate</text>\n";

    // Useless-marker diagonal and the target-FPR marker.
    out << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1)
        << "\" y2=\"" << py(1) << "\" stroke=\"gray\" stroke-width=\"1\"/>\n";
    out << "<line x1=\"" << px(t_marker) << "\" y1=\"" << py(0) << "\" x2=\""
        << px(t_marker) << "\" y2=\"" << py(1)
        << "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";

    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* color = kPalette[c % (sizeof kPalette / sizeof kPalette[0])];
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"2\" points=\"";
        for (const auto& pt : curves[c].curve.points) {
            const double fx = std::clamp(pt.fpr, 0.0, 1.0);
            const double fy = std::clamp(pt.tpr, 0.0, 1.0);
            out << fmt(px(fx)) << ',' << fmt(py(fy)) << ' ';
        }
        out << "\"/>\n";

        // TPR callout at the marker: dot-dashed horizontal line plus label.
        const double tpr = curve_tpr_at_fpr(curves[c].curve, t_marker);
        out << "<line x1=\"" << px(0) << "\" y1=\"" << py(tpr) << "\" x2=\""
            << px(t_marker) << "\" y2=\"" << py(tpr) << "\" stroke=\"" << color
            << "\" stroke-dasharray=\"2,3,8,3\"/>\n";
        char pct[32];
        std::snprintf(pct, sizeof pct, "%.1f%%", 100.0 * tpr);
        out << "<text x=\"" << px(t_marker) + 6 << "\" y=\"" << py(tpr) + 4
            << "\" font-size=\"12\" fill=\"" << color << "\">" << curves[c].label
            << ": " << pct << "</text>\n";
    }

    // Legend.
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* color = kPalette[c % (sizeof kPalette / sizeof kPalette[0])];
        const double y = py(1) + 18.0 * (static_cast<double>(c) + 1.0);
        out << "<line x1=\"" << px(0) + 10 << "\" y1=\"" << y << "\" x2=\"" << px(0) + 40
            << "\" y2=\"" << y << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << px(0) + 46 << "\" y=\"" << y + 4
            << "\" font-size=\"12\">" << curves[c].label << "</text>\n";
    }

    out << "</svg>\n";
    if (!out) throw std::runtime_error("failed writing file: " + out_path);
}

}  // namespace stpr
