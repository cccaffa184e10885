#include "scenesmith/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <json.hpp>

#include "scenesmith/geometry.hpp"

namespace scenesmith {

bool SettleResult::any_fell() const {
    return std::any_of(objects.begin(), objects.end(), [](const SettleEntry& e) { return e.fell; });
}

double SettleResult::mean_displacement() const {
    if (objects.empty()) return 0.0;
    double sum = 0.0;
    for (const SettleEntry& e : objects) sum += std::min(e.displacement, 1.0);
    return sum / static_cast<double>(objects.size());
}

namespace {

constexpr int16_t kEmpty = -2;
constexpr int16_t kRoot = -1;

// Owner-labeled voxel lattice covering the scene bounds, every object AABB,
// and two root layers directly below top_z.
struct SettleGrid {
    double ox = 0, oy = 0, oz = 0;
    double res = 0.01;
    int nx = 0, ny = 0, nz = 0;
    std::vector<int16_t> cell;

    size_t idx(int ix, int iy, int iz) const {
        return (static_cast<size_t>(ix) * ny + iy) * nz + iz;
    }
    int16_t at(int ix, int iy, int iz) const { return cell[idx(ix, iy, iz)]; }
    void put(int ix, int iy, int iz, int16_t owner) {
        int16_t& c = cell[idx(ix, iy, iz)];
        if (c == kEmpty) c = owner;
    }
    bool in_xy(int ix, int iy) const { return ix >= 0 && ix < nx && iy >= 0 && iy < ny; }
    double cx(int ix) const { return ox + (ix + 0.5) * res; }
    double cy(int iy) const { return oy + (iy + 0.5) * res; }
};

SettleGrid make_grid(const SceneState& scene, double res) {
    const Bounds2D& b = scene.bounds;
    double min_x = b.min_x, max_x = b.max_x, min_y = b.min_y, max_y = b.max_y;
    double min_z = b.top_z - 2.0 * res, max_z = b.top_z;
    for (const PlacedObject& o : scene.objects) {
        const Aabb3 wb = o.world_aabb();
        min_x = std::min(min_x, wb.min.x);
        max_x = std::max(max_x, wb.max.x);
        min_y = std::min(min_y, wb.min.y);
        max_y = std::max(max_y, wb.max.y);
        min_z = std::min(min_z, wb.min.z);
        max_z = std::max(max_z, wb.max.z);
    }
    SettleGrid g;
    g.res = res;
    // The lattice stays anchored to the bounds minimum so cell walls land on
    // the same planes regardless of object extents.
    const auto anchor = [res](double base, double needed) {
        return base - res * std::ceil((base - needed) / res + 1.0);
    };
    g.ox = anchor(b.min_x, min_x);
    g.oy = anchor(b.min_y, min_y);
    g.oz = anchor(b.top_z - 2.0 * res, min_z);
    g.nx = static_cast<int>(std::ceil((max_x - g.ox) / res)) + 1;
    g.ny = static_cast<int>(std::ceil((max_y - g.oy) / res)) + 1;
    g.nz = static_cast<int>(std::ceil((max_z - g.oz) / res)) + 2;
    g.cell.assign(static_cast<size_t>(g.nx) * g.ny * g.nz, kEmpty);

    // Root slab: two layers below top_z, spanning the bounds rectangle.
    for (int ix = 0; ix < g.nx; ++ix) {
        const double wx = g.cx(ix);
        if (wx < b.min_x || wx > b.max_x) continue;
        for (int iy = 0; iy < g.ny; ++iy) {
            const double wy = g.cy(iy);
            if (wy < b.min_y || wy > b.max_y) continue;
            for (int iz = 0; iz < g.nz; ++iz) {
                const double wz = g.oz + (iz + 0.5) * res;
                if (wz >= b.top_z - 2.0 * res && wz < b.top_z) g.cell[g.idx(ix, iy, iz)] = kRoot;
            }
        }
    }
    return g;
}

struct ObjectColumn {
    int ix = 0, iy = 0;
    std::vector<int> cells;  // ascending occupied z indices at the initial pose
};

// Cell k is occupied iff its center lies in a solid interval of the column
// through the cell center, evaluated in the asset frame (one inverse-rotated
// xy lookup per column).
std::vector<ObjectColumn> object_columns(const SettleGrid& g, const PlacedObject& obj) {
    std::vector<ObjectColumn> cols;
    const Aabb3 wb = obj.world_aabb();
    const int ix0 = std::max(0, static_cast<int>(std::floor((wb.min.x - g.ox) / g.res)) - 1);
    const int ix1 = std::min(g.nx - 1, static_cast<int>(std::ceil((wb.max.x - g.ox) / g.res)) + 1);
    const int iy0 = std::max(0, static_cast<int>(std::floor((wb.min.y - g.oy) / g.res)) - 1);
    const int iy1 = std::min(g.ny - 1, static_cast<int>(std::ceil((wb.max.y - g.oy) / g.res)) + 1);
    const double eff = obj.asset->effective_rotation(obj.pose.yaw);
    for (int ix = ix0; ix <= ix1; ++ix) {
        for (int iy = iy0; iy <= iy1; ++iy) {
            const Vec2 local = rotate({g.cx(ix) - obj.pose.position.x, g.cy(iy) - obj.pose.position.y}, -eff);
            const auto intervals = shape_z_intervals(obj.asset->shape, local.x, local.y);
            if (intervals.empty()) continue;
            ObjectColumn col{ix, iy, {}};
            for (const auto& [lo, hi] : intervals) {
                const double wlo = obj.pose.position.z + lo;
                const double whi = obj.pose.position.z + hi;
                const int k0 =
                    std::max(0, static_cast<int>(std::ceil((wlo - g.oz) / g.res - 0.5 - 1e-12)));
                const int k1 = std::min(
                    g.nz - 1, static_cast<int>(std::floor((whi - g.oz) / g.res - 0.5 - 1e-12)));
                for (int k = k0; k <= k1; ++k) col.cells.push_back(k);
            }
            if (!col.cells.empty()) {
                std::sort(col.cells.begin(), col.cells.end());
                cols.push_back(std::move(col));
            }
        }
    }
    return cols;
}

struct ContactCell {
    int ix = 0, iy = 0;
    int k_support = 0;  // scene cell the object rests on
    int16_t owner = kRoot;
};

// Top of the support surface near a contact, restricted to within one cell
// of the contact's support layer so unrelated geometry far below does not
// masquerade as a cliff.  Cells of the settling object itself are ignored.
bool surface_height(const SettleGrid& g, int ix, int iy, int k_support, int16_t self, double* h) {
    if (!g.in_xy(ix, iy)) return false;
    for (int k = std::min(g.nz - 1, k_support + 1); k >= std::max(0, k_support - 1); --k) {
        const int16_t c = g.at(ix, iy, k);
        if (c != kEmpty && c != self) {
            *h = g.oz + (k + 1) * g.res;
            return true;
        }
    }
    return false;
}

double gradient_component(bool has_lo, double h_lo, double h_c, bool has_hi, double h_hi, double res) {
    if (has_lo && has_hi) return (h_hi - h_lo) / (2.0 * res);
    if (has_hi) return (h_hi - h_c) / res;
    if (has_lo) return (h_c - h_lo) / res;
    return 0.0;
}

bool inside_contact_hull(const std::vector<Vec2>& centers, Vec2 com_xy) {
    const std::vector<Vec2> hull = hull_or_degenerate(centers);
    if (hull.size() >= 3) return point_in_convex(Footprint{hull}, com_xy, 1e-9);
    return distance_to_convex(hull, com_xy) <= 1e-9;
}

}  // namespace

SettleResult QuasiStaticBackend::settle(SceneState& scene, int max_steps) {
    SettleResult result;
    result.objects.resize(scene.objects.size());
    scene.support.clear();
    if (scene.objects.empty() || max_steps <= 0) return result;

    SettleGrid grid = make_grid(scene, resolution_);

    std::vector<size_t> order(scene.objects.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return scene.objects[a].world_aabb().min.z < scene.objects[b].world_aabb().min.z;
    });

    std::vector<std::vector<ContactCell>> contacts(scene.objects.size());
    std::set<std::pair<int, int>> edge_set;

    for (size_t oi : order) {
        PlacedObject& obj = scene.objects[oi];
        SettleEntry& entry = result.objects[oi];
        const std::vector<ObjectColumn> cols = object_columns(grid, obj);

        int drop = std::numeric_limits<int>::max();
        std::vector<int> support_k(cols.size(), -1);
        for (size_t c = 0; c < cols.size(); ++c) {
            int k = cols[c].cells.front() - 1;
            while (k >= 0 && grid.at(cols[c].ix, cols[c].iy, k) == kEmpty) --k;
            if (k >= 0) {
                support_k[c] = k;
                drop = std::min(drop, cols[c].cells.front() - k - 1);
            }
        }
        if (cols.empty() || drop == std::numeric_limits<int>::max()) {
            entry.fell = true;
            entry.displacement = 1.0;
            continue;
        }

        obj.pose.position.z -= drop * resolution_;
        entry.displacement = std::min(drop * resolution_, 1.0);
        for (size_t c = 0; c < cols.size(); ++c) {
            if (support_k[c] >= 0 && cols[c].cells.front() - support_k[c] - 1 == drop) {
                const int16_t owner = grid.at(cols[c].ix, cols[c].iy, support_k[c]);
                contacts[oi].push_back({cols[c].ix, cols[c].iy, support_k[c], owner});
                if (edge_set.insert({owner, static_cast<int>(oi)}).second)
                    scene.support.edges.push_back({owner, static_cast<int>(oi)});
            }
            for (int k : cols[c].cells) grid.put(cols[c].ix, cols[c].iy, k - drop, static_cast<int16_t>(oi));
        }
    }

    // Statics in stamp order: supporters always precede what they hold, so a
    // subtree's members are final when its base is checked.
    for (size_t oi : order) {
        if (result.objects[oi].fell) continue;
        const std::vector<int> members = scene.support.subtree(static_cast<int>(oi));
        double mass = 0.0;
        Vec2 com_xy{0, 0};
        for (int m : members) {
            const PlacedObject& part = scene.objects[m];
            const Vec3 com = part.world_com();
            com_xy = com_xy + com.xy() * part.mass;
            mass += part.mass;
        }
        com_xy = com_xy * (1.0 / mass);

        std::vector<Vec2> centers;
        centers.reserve(contacts[oi].size());
        for (const ContactCell& c : contacts[oi]) centers.push_back({grid.cx(c.ix), grid.cy(c.iy)});

        bool stands = inside_contact_hull(centers, com_xy);
        const double mu = scene.objects[oi].friction;
        for (const ContactCell& c : contacts[oi]) {
            if (!stands) break;
            double hc = 0, hw = 0, he = 0, hs = 0, hn = 0;
            surface_height(grid, c.ix, c.iy, c.k_support, static_cast<int16_t>(oi), &hc);
            const bool w = surface_height(grid, c.ix - 1, c.iy, c.k_support, static_cast<int16_t>(oi), &hw);
            const bool e = surface_height(grid, c.ix + 1, c.iy, c.k_support, static_cast<int16_t>(oi), &he);
            const bool s = surface_height(grid, c.ix, c.iy - 1, c.k_support, static_cast<int16_t>(oi), &hs);
            const bool n = surface_height(grid, c.ix, c.iy + 1, c.k_support, static_cast<int16_t>(oi), &hn);
            const double gx = gradient_component(w, hw, hc, e, he, resolution_);
            const double gy = gradient_component(s, hs, hc, n, hn, resolution_);
            if (std::hypot(gx, gy) > mu + 1e-9) stands = false;
        }

        if (!stands) {
            for (int m : members) {
                result.objects[m].fell = true;
                result.objects[m].displacement = 1.0;
            }
        }
    }
    return result;
}

double settle_distance(SimulationBackend& backend, SceneState& scene, int steps) {
    return backend.settle(scene, steps).mean_displacement();
}

std::string settle_request_json(const SceneState& scene, int steps) {
    nlohmann::json j;
    j["steps"] = steps;
    j["bounds"] = {{"min_x", scene.bounds.min_x}, {"max_x", scene.bounds.max_x},
                   {"min_y", scene.bounds.min_y}, {"max_y", scene.bounds.max_y},
                   {"top_z", scene.bounds.top_z}};
    nlohmann::json objects = nlohmann::json::array();
    for (const PlacedObject& o : scene.objects) {
        objects.push_back({{"id", o.id},
                           {"asset", o.asset->id},
                           {"pose",
                            {{"position", {o.pose.position.x, o.pose.position.y, o.pose.position.z}},
                             {"yaw", o.pose.yaw}}},
                           {"mass", o.mass},
                           {"friction", o.friction},
                           {"com_shift", {o.com_shift.x, o.com_shift.y, o.com_shift.z}},
                           {"tilt", {o.tilt.x, o.tilt.y}}});
    }
    j["objects"] = std::move(objects);
    return j.dump();
}

SettleResult parse_settle_response(const std::string& line, size_t object_count) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("objects") || !j["objects"].is_array())
        throw SceneFileError("settle response is not a JSON object with an \"objects\" array");
    const nlohmann::json& arr = j["objects"];
    if (arr.size() != object_count)
        throw SceneFileError("settle response has " + std::to_string(arr.size()) + " objects, expected " +
                             std::to_string(object_count));
    SettleResult result;
    for (const nlohmann::json& e : arr) {
        if (!e.is_object() || !e.contains("displacement") || !e["displacement"].is_number() ||
            !e.contains("fell") || !e["fell"].is_boolean())
            throw SceneFileError("settle response entries need numeric displacement and boolean fell");
        const double d = e["displacement"].get<double>();
        if (d < 0.0) throw SceneFileError("settle response displacement is negative");
        result.objects.push_back({std::min(d, 1.0), e["fell"].get<bool>()});
    }
    return result;
}

}  // namespace scenesmith
