#include "sdipipe/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sdipipe::svg {

namespace {

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// XML comments may not contain "--"; the embedded data tables are CSV, so
// just soften any dashes pairs.
std::string comment_safe(const std::string& s) {
    std::string out = s;
    size_t pos = 0;
    while ((pos = out.find("--", pos)) != std::string::npos) out.replace(pos, 2, "- -");
    return out;
}

struct Scale {
    double lo = 0, hi = 1, px0 = 0, px1 = 1;
    double operator()(double v) const { return px0 + (v - lo) / (hi - lo) * (px1 - px0); }
};

void nice_ticks(double lo, double hi, std::vector<double>& ticks) {
    double span = hi - lo;
    if (span <= 0) span = 1;
    double raw = span / 5.0;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (raw <= m * mag) {
            step = m * mag;
            break;
        }
    double t = std::ceil(lo / step) * step;
    for (; t <= hi + 1e-9; t += step) ticks.push_back(t);
}

void month_ticks(Date lo, Date hi, std::vector<Date>& ticks) {
    int y, m, d;
    lo.civil(y, m, d);
    Date t = Date::from_civil(y, m, 1);
    if (t < lo) {
        m == 12 ? (void)(t = Date::from_civil(y + 1, 1, 1)) : (void)(t = Date::from_civil(y, m + 1, 1));
    }
    while (t <= hi) {
        ticks.push_back(t);
        t.civil(y, m, d);
        t = m == 12 ? Date::from_civil(y + 1, 1, 1) : Date::from_civil(y, m + 1, 1);
    }
}

const char* kFont = "font-family=\"Helvetica,Arial,sans-serif\"";

void render_one_panel(std::string& out, const Panel& p, double x0, double y0, double w, double h) {
    Date dmin(INT32_MAX), dmax(INT32_MIN);
    double vmin = 1e300, vmax = -1e300;
    for (const auto& s : p.series) {
        for (Date d : s.dates) {
            dmin = std::min(dmin, d);
            dmax = std::max(dmax, d);
        }
        for (double v : s.values) {
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    }
    if (p.y_min != p.y_max) {
        vmin = p.y_min;
        vmax = p.y_max;
    } else if (vmin > vmax) {
        vmin = 0;
        vmax = 1;
    } else {
        double pad = (vmax - vmin) * 0.08 + 1e-9;
        vmin -= pad;
        vmax += pad;
    }
    if (dmin > dmax) {
        dmin = Date(0);
        dmax = Date(1);
    }
    Scale xs{double(dmin.days()), double(std::max(dmax.days(), dmin.days() + 1)), x0 + 55, x0 + w - 15};
    Scale ys{vmin, vmax, y0 + h - 28, y0 + 22};

    out += "<rect x=\"" + num(x0 + 55) + "\" y=\"" + num(y0 + 22) + "\" width=\"" +
           num(w - 70) + "\" height=\"" + num(h - 50) +
           "\" fill=\"#fcfcfc\" stroke=\"#999\" stroke-width=\"0.5\"/>\n";
    out += "<text x=\"" + num(x0 + 55) + "\" y=\"" + num(y0 + 14) + "\" font-size=\"13\" " +
           kFont + ">" + esc(p.title) + "</text>\n";

    for (const auto& b : p.bands) {
        double bx0 = xs(double(b.from.days())), bx1 = xs(double(b.to.days()));
        out += "<rect x=\"" + num(bx0) + "\" y=\"" + num(ys(vmax)) + "\" width=\"" +
               num(std::max(0.0, bx1 - bx0)) + "\" height=\"" + num(ys(vmin) - ys(vmax)) +
               "\" fill=\"" + b.color + "\" fill-opacity=\"0.25\"/>\n";
        if (!b.label.empty())
            out += "<text x=\"" + num(bx0 + 3) + "\" y=\"" + num(ys(vmax) + 12) +
                   "\" font-size=\"10\" fill=\"#444\" " + kFont + ">" + esc(b.label) + "</text>\n";
    }

    std::vector<double> ticks;
    nice_ticks(vmin, vmax, ticks);
    for (double t : ticks) {
        out += "<line x1=\"" + num(x0 + 50) + "\" y1=\"" + num(ys(t)) + "\" x2=\"" +
               num(x0 + w - 15) + "\" y2=\"" + num(ys(t)) +
               "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n";
        out += "<text x=\"" + num(x0 + 46) + "\" y=\"" + num(ys(t) + 3) +
               "\" font-size=\"9\" text-anchor=\"end\" " + kFont + ">" + num(t) + "</text>\n";
    }
    std::vector<Date> dticks;
    month_ticks(dmin, dmax, dticks);
    for (Date t : dticks) {
        out += "<line x1=\"" + num(xs(double(t.days()))) + "\" y1=\"" + num(ys(vmin)) +
               "\" x2=\"" + num(xs(double(t.days()))) + "\" y2=\"" + num(ys(vmin) + 4) +
               "\" stroke=\"#555\" stroke-width=\"0.7\"/>\n";
        out += "<text x=\"" + num(xs(double(t.days()))) + "\" y=\"" + num(ys(vmin) + 14) +
               "\" font-size=\"9\" text-anchor=\"middle\" " + kFont + ">" + esc(t.to_string()) +
               "</text>\n";
    }
    if (!p.y_label.empty())
        out += "<text x=\"" + num(x0 + 12) + "\" y=\"" + num(y0 + h / 2) +
               "\" font-size=\"10\" text-anchor=\"middle\" transform=\"rotate(-90 " +
               num(x0 + 12) + " " + num(y0 + h / 2) + ")\" " + kFont + ">" + esc(p.y_label) +
               "</text>\n";

    for (const auto& m : p.markers) {
        double mx = xs(double(m.at.days()));
        out += "<line x1=\"" + num(mx) + "\" y1=\"" + num(ys(vmin)) + "\" x2=\"" + num(mx) +
               "\" y2=\"" + num(ys(vmax)) +
               "\" stroke=\"" + m.color + "\" stroke-width=\"1\" stroke-dasharray=\"4,3\"/>\n";
        if (!m.label.empty())
            out += "<text x=\"" + num(mx + 3) + "\" y=\"" + num(ys(vmax) + 22) +
                   "\" font-size=\"9\" fill=\"" + m.color + "\" " + kFont + ">" + esc(m.label) +
                   "</text>\n";
    }

    double legend_x = x0 + 62;
    for (const auto& s : p.series) {
        if (s.dates.empty()) continue;
        out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.4\"";
        if (s.dashed) out += " stroke-dasharray=\"5,3\"";
        out += " points=\"";
        for (size_t i = 0; i < s.dates.size(); ++i) {
            out += num(xs(double(s.dates[i].days())));
            out += ',';
            out += num(ys(s.values[i]));
            out += ' ';
        }
        out += "\"/>\n";
        out += "<line x1=\"" + num(legend_x) + "\" y1=\"" + num(y0 + h - 6) + "\" x2=\"" +
               num(legend_x + 16) + "\" y2=\"" + num(y0 + h - 6) + "\" stroke=\"" + s.color +
               "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + num(legend_x + 20) + "\" y=\"" + num(y0 + h - 3) +
               "\" font-size=\"9\" " + kFont + ">" + esc(s.label) + "</text>\n";
        legend_x += 26.0 + 6.0 * double(s.label.size());
    }
}

}  // namespace

std::string render_panels(const std::vector<Panel>& panels, int width,
                          const std::string& data_comment) {
    const double panel_h = 240;
    double height = panel_h * double(panels.size()) + 10;
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + std::to_string(width) + " " +
           num(height) + "\">\n";
    if (!data_comment.empty()) out += "<!--\n" + comment_safe(data_comment) + "\n-->\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (size_t i = 0; i < panels.size(); ++i)
        render_one_panel(out, panels[i], 0, double(i) * panel_h + 5, double(width), panel_h);
    out += "</svg>\n";
    return out;
}

std::string render_bar_panel(const BarPanel& panel, int width, const std::string& data_comment) {
    const double h = 320;
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + std::to_string(width) + " " + num(h) +
           "\">\n";
    if (!data_comment.empty()) out += "<!--\n" + comment_safe(data_comment) + "\n-->\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"55\" y=\"14\" font-size=\"13\" " + std::string(kFont) + ">" +
           esc(panel.title) + "</text>\n";

    double bar_max = 1e-9;
    for (const auto& g : panel.groups) bar_max = std::max({bar_max, g.a, g.b});
    double overlay_min = 1e300, overlay_max = -1e300;
    for (const auto& s : panel.overlay)
        for (double v : s.values) {
            overlay_min = std::min(overlay_min, v);
            overlay_max = std::max(overlay_max, v);
        }
    if (overlay_min > overlay_max) {
        overlay_min = 0;
        overlay_max = 1;
    }
    double pad = (overlay_max - overlay_min) * 0.1 + 1e-9;
    overlay_min -= pad;
    overlay_max += pad;

    const double px0 = 55, px1 = double(width) - 55, py0 = 30, py1 = h - 60;
    const size_t n = panel.groups.size();
    double slot = (px1 - px0) / double(std::max<size_t>(n, 1));
    Scale bars{0, bar_max * 1.1, py1, py0};
    Scale lines{overlay_min, overlay_max, py1, py0};

    std::vector<double> ticks;
    nice_ticks(0, bar_max * 1.1, ticks);
    for (double t : ticks)
        out += "<text x=\"" + num(px0 - 6) + "\" y=\"" + num(bars(t) + 3) +
               "\" font-size=\"9\" text-anchor=\"end\" " + kFont + ">" + num(t) + "</text>\n";
    std::vector<double> lticks;
    nice_ticks(overlay_min, overlay_max, lticks);
    for (double t : lticks)
        out += "<text x=\"" + num(px1 + 6) + "\" y=\"" + num(lines(t) + 3) +
               "\" font-size=\"9\" " + kFont + ">" + num(t) + "</text>\n";

    for (size_t i = 0; i < n; ++i) {
        const auto& g = panel.groups[i];
        double cx = px0 + slot * (double(i) + 0.5);
        double bw = std::max(2.0, slot * 0.22);
        out += "<rect x=\"" + num(cx - bw - 1) + "\" y=\"" + num(bars(g.a)) + "\" width=\"" +
               num(bw) + "\" height=\"" + num(py1 - bars(g.a)) + "\" fill=\"" + panel.color_a +
               "\" fill-opacity=\"0.8\"/>\n";
        out += "<rect x=\"" + num(cx + 1) + "\" y=\"" + num(bars(g.b)) + "\" width=\"" + num(bw) +
               "\" height=\"" + num(py1 - bars(g.b)) + "\" fill=\"" + panel.color_b +
               "\" fill-opacity=\"0.8\"/>\n";
        out += "<text x=\"" + num(cx) + "\" y=\"" + num(py1 + 12) +
               "\" font-size=\"9\" text-anchor=\"middle\" " + kFont + ">" + esc(g.category) +
               "</text>\n";
    }
    for (const auto& s : panel.overlay) {
        out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.6\"";
        if (s.dashed) out += " stroke-dasharray=\"5,3\"";
        out += " points=\"";
        for (size_t i = 0; i < s.values.size() && i < n; ++i) {
            out += num(px0 + slot * (double(i) + 0.5));
            out += ',';
            out += num(lines(s.values[i]));
            out += ' ';
        }
        out += "\"/>\n";
    }
    double lx = px0;
    auto legend = [&](const std::string& color, const std::string& label, bool line) {
        if (label.empty()) return;
        if (line)
            out += "<line x1=\"" + num(lx) + "\" y1=\"" + num(h - 26) + "\" x2=\"" + num(lx + 16) +
                   "\" y2=\"" + num(h - 26) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        else
            out += "<rect x=\"" + num(lx) + "\" y=\"" + num(h - 32) +
                   "\" width=\"12\" height=\"10\" fill=\"" + color + "\"/>\n";
        out += "<text x=\"" + num(lx + 20) + "\" y=\"" + num(h - 23) + "\" font-size=\"9\" " +
               kFont + ">" + esc(label) + "</text>\n";
        lx += 30 + 6.0 * double(label.size());
    };
    legend(panel.color_a, panel.label_a, false);
    legend(panel.color_b, panel.label_b, false);
    for (const auto& s : panel.overlay) legend(s.color, s.label, true);
    out += "<text x=\"" + num(px1 + 40) + "\" y=\"" + num((py0 + py1) / 2) +
           "\" font-size=\"10\" text-anchor=\"middle\" transform=\"rotate(90 " + num(px1 + 40) +
           " " + num((py0 + py1) / 2) + ")\" " + kFont + ">" + esc(panel.overlay_y_label) +
           "</text>\n";
    out += "<text x=\"14\" y=\"" + num((py0 + py1) / 2) +
           "\" font-size=\"10\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
           num((py0 + py1) / 2) + ")\" " + kFont + ">" + esc(panel.y_label) + "</text>\n";
    out += "</svg>\n";
    return out;
}

}  // namespace sdipipe::svg
