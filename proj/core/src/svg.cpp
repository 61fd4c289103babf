#include "larvae/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "larvae/errors.hpp"

namespace larvae {

namespace {

constexpr double kWidth = 860.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf"};

std::string fmt(double v, const char* spec = "%.2f") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

}  // namespace

std::string render_svg(const std::string& title, const std::vector<double>& x,
                       const std::vector<SvgChannel>& channels) {
    if (channels.empty()) throw ValidationError("svg: empty channel list");
    if (x.size() < 2) throw ValidationError("svg: need at least two samples");
    for (const auto& c : channels)
        if (c.values.size() != x.size())
            throw ValidationError("svg: channel '" + c.name + "' length mismatch");

    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -ymin;
    for (const auto& c : channels)
        for (double v : c.values) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    if (!(std::isfinite(ymin) && std::isfinite(ymax)))
        throw ValidationError("svg: non-finite sample");
    if (ymax - ymin < 1e-12) {
        ymax += 1.0;
        ymin -= 1.0;
    }
    const double xmin = x.front();
    const double xmax = x.back();
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto X = [&](double v) { return kLeft + (v - xmin) / (xmax - xmin) * plot_w; };
    auto Y = [&](double v) { return kTop + (1.0 - (v - ymin) / (ymax - ymin)) * plot_h; };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << fmt(kWidth, "%.0f")
      << " " << fmt(kHeight, "%.0f") << "\" font-family=\"monospace\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"20\" text-anchor=\"middle\">" << title
      << "</text>\n";

    // Axes and ticks.
    s << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft)
      << "\" y2=\"" << fmt(kHeight - kBottom) << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kHeight - kBottom) << "\" x2=\""
      << fmt(kWidth - kRight) << "\" y2=\"" << fmt(kHeight - kBottom)
      << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double tx = xmin + (xmax - xmin) * k / 5.0;
        const double ty = ymin + (ymax - ymin) * k / 5.0;
        s << "<line x1=\"" << fmt(X(tx)) << "\" y1=\"" << fmt(kHeight - kBottom) << "\" x2=\""
          << fmt(X(tx)) << "\" y2=\"" << fmt(kHeight - kBottom + 5) << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << fmt(X(tx)) << "\" y=\"" << fmt(kHeight - kBottom + 20)
          << "\" text-anchor=\"middle\">" << fmt(tx, "%.4g") << "</text>\n";
        s << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(Y(ty)) << "\" x2=\""
          << fmt(kLeft) << "\" y2=\"" << fmt(Y(ty)) << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(Y(ty) + 4)
          << "\" text-anchor=\"end\">" << fmt(ty, "%.4g") << "</text>\n";
    }
    s << "<text x=\"" << fmt(kLeft + plot_w / 2) << "\" y=\"" << fmt(kHeight - 8)
      << "\" text-anchor=\"middle\">t</text>\n";

    // Data and legend.
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const char* color = kPalette[c % (sizeof(kPalette) / sizeof(kPalette[0]))];
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < x.size(); ++i)
            s << fmt(X(x[i])) << "," << fmt(Y(channels[c].values[i])) << " ";
        s << "\"/>\n";
        const double ly = kTop + 14.0 * static_cast<double>(c);
        s << "<line x1=\"" << fmt(kWidth - kRight - 120) << "\" y1=\"" << fmt(ly) << "\" x2=\""
          << fmt(kWidth - kRight - 100) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
        s << "<text x=\"" << fmt(kWidth - kRight - 95) << "\" y=\"" << fmt(ly + 4) << "\">"
          << channels[c].name << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

void emit_svg(const std::string& path, const std::string& title, const std::vector<double>& x,
              const std::vector<SvgChannel>& channels) {
    const std::string body = render_svg(title, x, channels);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << body;
}

}  // namespace larvae
