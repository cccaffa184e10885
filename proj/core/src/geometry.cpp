#include "scenesmith/geometry.hpp"

#include <algorithm>
#include <limits>

namespace scenesmith {

double signed_area(std::span<const Vec2> poly) {
    if (poly.size() < 3) return 0.0;
    double acc = 0.0;
    for (size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        acc += a.cross(b);
    }
    return 0.5 * acc;
}

double Footprint::area() const { return signed_area(hull); }

Aabb2 Footprint::aabb() const {
    Aabb2 box;
    if (hull.empty()) return box;
    box.min_x = box.max_x = hull[0].x;
    box.min_y = box.max_y = hull[0].y;
    for (const Vec2& p : hull) {
        box.min_x = std::min(box.min_x, p.x);
        box.max_x = std::max(box.max_x, p.x);
        box.min_y = std::min(box.min_y, p.y);
        box.max_y = std::max(box.max_y, p.y);
    }
    return box;
}

Vec2 Footprint::centroid() const {
    if (hull.empty()) return {};
    if (hull.size() == 1) return hull[0];
    if (hull.size() == 2) return {(hull[0].x + hull[1].x) * 0.5, (hull[0].y + hull[1].y) * 0.5};
    // Area-weighted centroid; falls back to vertex mean for zero-area input.
    double a2 = 0.0;
    Vec2 c{0.0, 0.0};
    for (size_t i = 0; i < hull.size(); ++i) {
        const Vec2& p = hull[i];
        const Vec2& q = hull[(i + 1) % hull.size()];
        const double w = p.cross(q);
        a2 += w;
        c.x += (p.x + q.x) * w;
        c.y += (p.y + q.y) * w;
    }
    if (std::abs(a2) < 1e-300) {
        Vec2 mean{0.0, 0.0};
        for (const Vec2& p : hull) mean = mean + p;
        return mean * (1.0 / static_cast<double>(hull.size()));
    }
    return {c.x / (3.0 * a2), c.y / (3.0 * a2)};
}

static std::vector<Vec2> sorted_unique(std::span<const Vec2> points) {
    std::vector<Vec2> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    return pts;
}

static std::vector<Vec2> monotone_chain(std::vector<Vec2> pts) {
    const size_t n = pts.size();
    if (n <= 2) return pts;
    std::vector<Vec2> h(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && (h[k - 1] - h[k - 2]).cross(pts[i] - h[k - 2]) <= 0) --k;
        h[k++] = pts[i];
    }
    for (size_t i = n - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && (h[k - 1] - h[k - 2]).cross(pts[i] - h[k - 2]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

Footprint convex_hull_2d(std::span<const Vec2> points) {
    std::vector<Vec2> pts = sorted_unique(points);
    std::vector<Vec2> h = monotone_chain(std::move(pts));
    if (h.size() < 3 || std::abs(signed_area(h)) < 1e-300)
        throw DegenerateInput("convex_hull_2d: points are collinear or fewer than 3 distinct");
    return Footprint{std::move(h)};
}

std::vector<Vec2> hull_or_degenerate(std::span<const Vec2> points) {
    std::vector<Vec2> pts = sorted_unique(points);
    if (pts.size() <= 2) return pts;
    std::vector<Vec2> h = monotone_chain(std::move(pts));
    if (h.size() >= 3 && std::abs(signed_area(h)) < 1e-300) {
        // Collinear set: keep the two extreme points of the segment.
        return {h.front(), *std::max_element(h.begin(), h.end(), [&](Vec2 a, Vec2 b) {
                    const Vec2 d0 = a - h.front();
                    const Vec2 d1 = b - h.front();
                    return d0.dot(d0) < d1.dot(d1);
                })};
    }
    return h;
}

bool point_in_convex(const Footprint& fp, Vec2 p, double eps) {
    if (fp.hull.size() < 3) return false;
    for (size_t i = 0; i < fp.hull.size(); ++i) {
        const Vec2& a = fp.hull[i];
        const Vec2& b = fp.hull[(i + 1) % fp.hull.size()];
        if ((b - a).cross(p - a) < -eps) return false;
    }
    return true;
}

static double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    if (len2 < 1e-300) return (p - a).norm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

double distance_to_convex(std::span<const Vec2> hull, Vec2 p) {
    if (hull.empty()) return std::numeric_limits<double>::infinity();
    if (hull.size() == 1) return (p - hull[0]).norm();
    if (hull.size() == 2) return point_segment_distance(p, hull[0], hull[1]);
    bool inside = true;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < hull.size(); ++i) {
        const Vec2& a = hull[i];
        const Vec2& b = hull[(i + 1) % hull.size()];
        if ((b - a).cross(p - a) < 0) inside = false;
        best = std::min(best, point_segment_distance(p, a, b));
    }
    return inside ? 0.0 : best;
}

std::vector<Vec2> clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip) {
    std::vector<Vec2> out(subject.begin(), subject.end());
    if (clip.size() < 3) return {};
    for (size_t i = 0; i < clip.size() && !out.empty(); ++i) {
        const Vec2 a = clip[i];
        const Vec2 b = clip[(i + 1) % clip.size()];
        const Vec2 edge = b - a;
        std::vector<Vec2> in;
        in.swap(out);
        for (size_t j = 0; j < in.size(); ++j) {
            const Vec2 cur = in[j];
            const Vec2 nxt = in[(j + 1) % in.size()];
            const double dc = edge.cross(cur - a);
            const double dn = edge.cross(nxt - a);
            if (dc >= 0) out.push_back(cur);
            if ((dc > 0 && dn < 0) || (dc < 0 && dn > 0)) {
                const double t = dc / (dc - dn);
                out.push_back(cur + (nxt - cur) * t);
            }
        }
    }
    return out;
}

double overlap_area(const Footprint& a, const Footprint& b) {
    if (a.hull.size() < 3 || b.hull.size() < 3) return 0.0;
    const std::vector<Vec2> inter = clip_convex(a.hull, b.hull);
    if (inter.size() < 3) return 0.0;
    return std::abs(signed_area(inter));
}

double boundary_violation(const Footprint& fp, const Aabb2& rect) {
    double worst = 0.0;
    for (const Vec2& p : fp.hull) {
        const double dx = std::max({rect.min_x - p.x, p.x - rect.max_x, 0.0});
        const double dy = std::max({rect.min_y - p.y, p.y - rect.max_y, 0.0});
        worst = std::max(worst, std::hypot(dx, dy));
    }
    return worst;
}

}  // namespace scenesmith
