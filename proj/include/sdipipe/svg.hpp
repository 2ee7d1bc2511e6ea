#pragma once

#include <string>
#include <vector>

#include "sdipipe/dates.hpp"

namespace sdipipe::svg {

struct Series {
    std::string label;
    std::string color;
    std::vector<Date> dates;
    std::vector<double> values;
    bool dashed = false;
};

struct Band {
    Date from, to;
    std::string color;
    std::string label;
};

struct Marker {
    Date at;
    std::string color;
    std::string label;
};

// One x/y panel with date axis, numeric y axis, optional shaded bands and
// vertical markers. Renders to a standalone <svg> fragment.
struct Panel {
    std::string title;
    std::string y_label;
    std::vector<Series> series;
    std::vector<Band> bands;
    std::vector<Marker> markers;
    double y_min = 0.0, y_max = 0.0;  // equal = auto
};

// Vertical bar groups with two values per category (used for the
// before/after case bars); values share the panel's y axis.
struct BarGroup {
    std::string category;
    double a = 0.0, b = 0.0;
};

struct BarPanel {
    std::string title;
    std::string y_label;
    std::string color_a, color_b, label_a, label_b;
    std::vector<BarGroup> groups;
    // optional overlaid lines indexed by category position
    std::vector<Series> overlay;  // dates ignored; values align with groups
    std::string overlay_y_label;
};

// Stacked panels sharing a width; data_comment is embedded as an XML
// comment for auditability. Returns a complete standalone SVG document.
std::string render_panels(const std::vector<Panel>& panels, int width,
                          const std::string& data_comment);

std::string render_bar_panel(const BarPanel& panel, int width, const std::string& data_comment);

}  // namespace sdipipe::svg
