#pragma once

#include <cstdint>
#include <vector>

#include "scenesmith/asset.hpp"
#include "scenesmith/geometry.hpp"

namespace scenesmith {

struct GridIndex {
    int x = 0, y = 0, z = 0;

    bool operator==(const GridIndex&) const = default;
};

// Dense voxel grid, bit-packed along z.  A voxel is occupied iff its center
// lies inside the solid.  Voxel (i,j,k) has center origin + res*(i+.5, j+.5, k+.5).
struct OccupancyGrid {
    Vec3 origin;
    double resolution = 0.0;
    int nx = 0, ny = 0, nz = 0;
    int words_per_column = 0;
    std::vector<uint64_t> bits;

    static OccupancyGrid make(Vec3 origin, double resolution, int nx, int ny, int nz);

    size_t column_index(int i, int j) const { return (static_cast<size_t>(i) * ny + j) * words_per_column; }
    const uint64_t* column(int i, int j) const { return bits.data() + column_index(i, j); }
    uint64_t* column(int i, int j) { return bits.data() + column_index(i, j); }

    bool occupied(int i, int j, int k) const {
        return (column(i, j)[k >> 6] >> (k & 63)) & 1ULL;
    }
    void set(int i, int j, int k) { column(i, j)[k >> 6] |= 1ULL << (k & 63); }
    void clear(int i, int j, int k) { column(i, j)[k >> 6] &= ~(1ULL << (k & 63)); }

    Vec3 voxel_center(int i, int j, int k) const {
        return {origin.x + resolution * (i + 0.5), origin.y + resolution * (j + 0.5),
                origin.z + resolution * (k + 0.5)};
    }

    size_t count() const;
    // Lowest / highest occupied z index in the column, -1 when empty.
    int column_lowest(int i, int j) const;
    int column_highest(int i, int j) const;
};

// Voxelization of a posed asset on a grid that tightly wraps the rotated
// shape: per axis the core span covers the AABB with ceil(extent/res) voxels
// centered on it, plus one guaranteed-empty margin voxel on each side.
// Throws NonWatertight when parity is inconsistent for more than 1% of the
// mesh's non-empty columns.
OccupancyGrid voxelize(const AssetRecord& asset, const Pose& pose, double resolution);

// All integer offsets t such that the object grid, shifted by t, lies fully
// inside the scene grid and overlaps no occupied scene voxel.  Lexicographic
// (x, y, z) order.  Grids must share the same resolution.
std::vector<GridIndex> feasible_offsets(const OccupancyGrid& scene, const OccupancyGrid& object);

// 2D cell mask anchored in world coordinates.
struct SurfaceMask {
    int nx = 0, ny = 0;
    Vec2 origin_xy;
    double resolution = 0.0;
    std::vector<uint8_t> cells;

    bool at(int i, int j) const { return cells[static_cast<size_t>(i) * ny + j] != 0; }
    void set(int i, int j) { cells[static_cast<size_t>(i) * ny + j] = 1; }
    Vec2 cell_center(int i, int j) const {
        return {origin_xy.x + resolution * (i + 0.5), origin_xy.y + resolution * (j + 0.5)};
    }
    size_t count() const;
    std::vector<Vec2> centers() const;
};

// Columns holding an occupied voxel within k_bottom layers of the object's
// lowest occupied layer (lowest across the whole object, not per column).
SurfaceMask bottom_surface(const OccupancyGrid& object, int k_bottom);

// Bottom-surface columns whose supporting scene voxel sits within k_search
// cells directly below the column's own lowest occupied voxel, with the
// object shifted by `offset` into the scene grid.  The mask is anchored at
// the object's shifted position, so cell centers are world coordinates.
SurfaceMask contact_surface(const OccupancyGrid& object, GridIndex offset, const OccupancyGrid& scene,
                            int k_bottom, int k_search);

// True when the contact region exists and com_xy lies inside or on the
// convex hull of the contact cell centers (degenerate hulls: within 1e-9 of
// the point/segment).
bool support_valid(const SurfaceMask& contact, Vec2 com_xy);

}  // namespace scenesmith
