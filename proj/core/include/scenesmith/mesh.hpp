#pragma once

#include <array>
#include <string>
#include <vector>

#include "scenesmith/geometry.hpp"

namespace scenesmith {

class MeshError : public std::runtime_error {
  public:
    explicit MeshError(const std::string& what) : std::runtime_error(what) {}
};

class NonWatertight : public std::runtime_error {
  public:
    explicit NonWatertight(const std::string& what) : std::runtime_error(what) {}
};

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;

    Aabb3 aabb() const;

    // z values where an upward vertical ray at (x, y) crosses the surface,
    // sorted ascending.  Triangles parallel to the ray are skipped; the query
    // point carries a fixed sub-nanometer offset so rays through shared edges
    // or vertices resolve to a consistent parity.
    std::vector<double> z_crossings(double x, double y) const;

    // Solid intervals [z0, z1] along the column, from crossing parity.
    // odd_parity is set when the crossing count is odd (caller decides how
    // many such columns are tolerable).
    std::vector<std::pair<double, double>> z_intervals(double x, double y, bool* odd_parity = nullptr) const;
};

// Minimal OBJ reader: v and f records, fan triangulation, negative indices.
TriMesh load_obj(const std::string& path);
TriMesh parse_obj(const std::string& text, const std::string& origin_label);

}  // namespace scenesmith
