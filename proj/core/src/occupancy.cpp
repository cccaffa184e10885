#include "scenesmith/occupancy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace scenesmith {

OccupancyGrid OccupancyGrid::make(Vec3 origin, double resolution, int nx, int ny, int nz) {
    if (nx <= 0 || ny <= 0 || nz <= 0 || resolution <= 0)
        throw std::invalid_argument("OccupancyGrid::make: non-positive dimension");
    OccupancyGrid g;
    g.origin = origin;
    g.resolution = resolution;
    g.nx = nx;
    g.ny = ny;
    g.nz = nz;
    g.words_per_column = (nz + 63) / 64;
    g.bits.assign(static_cast<size_t>(nx) * ny * g.words_per_column, 0);
    return g;
}

size_t OccupancyGrid::count() const {
    size_t n = 0;
    for (uint64_t w : bits) n += static_cast<size_t>(std::popcount(w));
    return n;
}

int OccupancyGrid::column_lowest(int i, int j) const {
    const uint64_t* col = column(i, j);
    for (int w = 0; w < words_per_column; ++w)
        if (col[w]) return w * 64 + std::countr_zero(col[w]);
    return -1;
}

int OccupancyGrid::column_highest(int i, int j) const {
    const uint64_t* col = column(i, j);
    for (int w = words_per_column - 1; w >= 0; --w)
        if (col[w]) return w * 64 + 63 - std::countl_zero(col[w]);
    return -1;
}

namespace {

int core_span(double extent, double resolution) {
    const int n = static_cast<int>(std::ceil(extent / resolution - 1e-9));
    return std::max(1, n);
}

}  // namespace

OccupancyGrid voxelize(const AssetRecord& asset, const Pose& pose, double resolution) {
    const Aabb3 shape_box = asset.rotated_aabb(pose.yaw);
    const Vec3 center = shape_box.center() + pose.position;
    const int core_x = core_span(shape_box.max.x - shape_box.min.x, resolution);
    const int core_y = core_span(shape_box.max.y - shape_box.min.y, resolution);
    const int core_z = core_span(shape_box.max.z - shape_box.min.z, resolution);
    const Vec3 origin{center.x - (core_x * 0.5 + 1.0) * resolution,
                      center.y - (core_y * 0.5 + 1.0) * resolution,
                      center.z - (core_z * 0.5 + 1.0) * resolution};
    OccupancyGrid grid = OccupancyGrid::make(origin, resolution, core_x + 2, core_y + 2, core_z + 2);

    const double rot = asset.effective_rotation(pose.yaw);
    const bool is_mesh = std::holds_alternative<MeshShape>(asset.shape);
    size_t mesh_columns = 0, odd_columns = 0;
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.ny; ++j) {
            const Vec3 c = grid.voxel_center(i, j, 0);
            // Yaw-only poses keep vertical columns vertical, so one local
            // (x, y) lookup serves every voxel in the column.
            const Vec2 local = rotate({c.x - pose.position.x, c.y - pose.position.y}, -rot);
            bool odd = false;
            const auto intervals = shape_z_intervals(asset.shape, local.x, local.y, &odd);
            if (is_mesh && (!intervals.empty() || odd)) {
                ++mesh_columns;
                if (odd) ++odd_columns;
            }
            if (intervals.empty()) continue;
            for (int k = 0; k < grid.nz; ++k) {
                const double z = grid.origin.z + resolution * (k + 0.5) - pose.position.z;
                for (const auto& [lo, hi] : intervals) {
                    if (z >= lo && z <= hi) {
                        grid.set(i, j, k);
                        break;
                    }
                }
            }
        }
    }
    if (is_mesh && mesh_columns > 0 &&
        static_cast<double>(odd_columns) > 0.01 * static_cast<double>(mesh_columns)) {
        throw NonWatertight("mesh asset '" + asset.id + "': inconsistent ray parity in " +
                            std::to_string(odd_columns) + " of " + std::to_string(mesh_columns) + " columns");
    }
    return grid;
}

namespace {

bool columns_collide(const uint64_t* obj, int obj_words, const uint64_t* scene, int scene_words, int tz) {
    const int word_shift = tz >> 6;
    const int bit_shift = tz & 63;
    for (int w = 0; w < obj_words; ++w) {
        const uint64_t v = obj[w];
        if (!v) continue;
        const int tw = w + word_shift;
        if (tw < scene_words && (scene[tw] & (v << bit_shift))) return true;
        if (bit_shift && tw + 1 < scene_words && (scene[tw + 1] & (v >> (64 - bit_shift)))) return true;
    }
    return false;
}

}  // namespace

std::vector<GridIndex> feasible_offsets(const OccupancyGrid& scene, const OccupancyGrid& object) {
    if (std::abs(scene.resolution - object.resolution) > 1e-12)
        throw std::invalid_argument("feasible_offsets: resolution mismatch");
    std::vector<GridIndex> out;
    const int rx = scene.nx - object.nx;
    const int ry = scene.ny - object.ny;
    const int rz = scene.nz - object.nz;
    if (rx < 0 || ry < 0 || rz < 0) return out;

    // Skip all-empty object columns once.
    std::vector<std::pair<int, int>> obj_cols;
    for (int i = 0; i < object.nx; ++i)
        for (int j = 0; j < object.ny; ++j)
            if (object.column_lowest(i, j) >= 0) obj_cols.emplace_back(i, j);

    for (int tx = 0; tx <= rx; ++tx) {
        for (int ty = 0; ty <= ry; ++ty) {
            for (int tz = 0; tz <= rz; ++tz) {
                bool hit = false;
                for (const auto& [i, j] : obj_cols) {
                    if (columns_collide(object.column(i, j), object.words_per_column,
                                        scene.column(i + tx, j + ty), scene.words_per_column, tz)) {
                        hit = true;
                        break;
                    }
                }
                if (!hit) out.push_back({tx, ty, tz});
            }
        }
    }
    return out;
}

size_t SurfaceMask::count() const {
    size_t n = 0;
    for (uint8_t c : cells) n += c != 0;
    return n;
}

std::vector<Vec2> SurfaceMask::centers() const {
    std::vector<Vec2> out;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            if (at(i, j)) out.push_back(cell_center(i, j));
    return out;
}

SurfaceMask bottom_surface(const OccupancyGrid& object, int k_bottom) {
    SurfaceMask mask;
    mask.nx = object.nx;
    mask.ny = object.ny;
    mask.origin_xy = {object.origin.x, object.origin.y};
    mask.resolution = object.resolution;
    mask.cells.assign(static_cast<size_t>(object.nx) * object.ny, 0);

    int k_min = -1;
    for (int i = 0; i < object.nx; ++i)
        for (int j = 0; j < object.ny; ++j) {
            const int low = object.column_lowest(i, j);
            if (low >= 0 && (k_min < 0 || low < k_min)) k_min = low;
        }
    if (k_min < 0) return mask;

    for (int i = 0; i < object.nx; ++i)
        for (int j = 0; j < object.ny; ++j) {
            const int low = object.column_lowest(i, j);
            if (low >= 0 && low < k_min + k_bottom) mask.set(i, j);
        }
    return mask;
}

SurfaceMask contact_surface(const OccupancyGrid& object, GridIndex offset, const OccupancyGrid& scene,
                            int k_bottom, int k_search) {
    SurfaceMask bottom = bottom_surface(object, k_bottom);
    SurfaceMask mask;
    mask.nx = object.nx;
    mask.ny = object.ny;
    mask.origin_xy = {scene.origin.x + scene.resolution * offset.x,
                      scene.origin.y + scene.resolution * offset.y};
    mask.resolution = scene.resolution;
    mask.cells.assign(static_cast<size_t>(object.nx) * object.ny, 0);

    for (int i = 0; i < object.nx; ++i) {
        for (int j = 0; j < object.ny; ++j) {
            if (!bottom.at(i, j)) continue;
            const int si = i + offset.x;
            const int sj = j + offset.y;
            if (si < 0 || si >= scene.nx || sj < 0 || sj >= scene.ny) continue;
            const int low = object.column_lowest(i, j) + offset.z;
            for (int d = 1; d <= k_search; ++d) {
                const int k = low - d;
                if (k < 0 || k >= scene.nz) continue;
                if (scene.occupied(si, sj, k)) {
                    mask.set(i, j);
                    break;
                }
            }
        }
    }
    return mask;
}

bool support_valid(const SurfaceMask& contact, Vec2 com_xy) {
    const std::vector<Vec2> pts = contact.centers();
    if (pts.empty()) return false;
    return distance_to_convex(hull_or_degenerate(pts), com_xy) <= 1e-9;
}

}  // namespace scenesmith
