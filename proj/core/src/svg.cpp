#include "scenesmith/svg.hpp"

#include <cmath>
#include <cstdio>

#include "scenesmith/geometry.hpp"

namespace scenesmith {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string xml_escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (const char c : text) {
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

constexpr const char* kPalette[] = {
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
};
constexpr size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

}  // namespace

std::string render_svg(const SceneState& scene, const RenderOptions& options) {
    const Bounds2D& bounds = scene.bounds;
    const double scale = options.scale;
    const double margin = options.margin;
    const double width = bounds.width_x() * scale + 2.0 * margin;
    const double height = bounds.width_y() * scale + 2.0 * margin;
    const auto px = [&](double x) { return (x - bounds.min_x) * scale + margin; };
    const auto py = [&](double y) { return (bounds.max_y - y) * scale + margin; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) +
           "\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) + "\">\n";
    out += "  <rect x=\"" + fmt(px(bounds.min_x)) + "\" y=\"" + fmt(py(bounds.max_y)) + "\" width=\"" +
           fmt(bounds.width_x() * scale) + "\" height=\"" + fmt(bounds.width_y() * scale) +
           "\" fill=\"#f7f5f0\" stroke=\"#555555\" stroke-width=\"1.5000\"/>\n";

    for (const PlacedObject& object : scene.objects) {
        const Footprint fp = object.footprint();
        if (fp.empty()) continue;
        const char* color = kPalette[fnv1a64(object.id) % kPaletteSize];
        out += "  <polygon points=\"";
        for (size_t i = 0; i < fp.hull.size(); ++i) {
            if (i) out += " ";
            out += fmt(px(fp.hull[i].x)) + "," + fmt(py(fp.hull[i].y));
        }
        out += "\" fill=\"" + std::string(color) + "\" fill-opacity=\"0.6500\" stroke=\"" + color +
               "\" stroke-width=\"1.0000\"/>\n";

        const Vec2 c = fp.centroid();
        if (options.orientation_marks) {
            const Aabb2 box = fp.aabb();
            const double reach = 0.4 * std::min(box.max_x - box.min_x, box.max_y - box.min_y);
            const double yaw = object.pose.yaw + object.asset->front_yaw;
            const Vec2 tip{c.x + reach * std::cos(yaw), c.y + reach * std::sin(yaw)};
            out += "  <line x1=\"" + fmt(px(c.x)) + "\" y1=\"" + fmt(py(c.y)) + "\" x2=\"" +
                   fmt(px(tip.x)) + "\" y2=\"" + fmt(py(tip.y)) +
                   "\" stroke=\"#222222\" stroke-width=\"1.2000\"/>\n";
        }
        if (options.labels) {
            out += "  <text x=\"" + fmt(px(c.x)) + "\" y=\"" + fmt(py(c.y) - 0.012 * scale) +
                   "\" font-family=\"monospace\" font-size=\"" + fmt(0.028 * scale) +
                   "\" text-anchor=\"middle\" fill=\"#1a1a1a\">" + xml_escape(object.id) + "</text>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

}  // namespace scenesmith
