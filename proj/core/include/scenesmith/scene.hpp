#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "scenesmith/asset.hpp"
#include "scenesmith/geometry.hpp"

namespace scenesmith {

// Extent of the supporting surface ("root"); top_z is the height of its top
// face, where object bases rest.
struct Bounds2D {
    double min_x = 0, max_x = 0;
    double min_y = 0, max_y = 0;
    double top_z = 0;

    double width_x() const { return max_x - min_x; }
    double width_y() const { return max_y - min_y; }
    double shortest_dimension() const { return std::min(width_x(), width_y()); }
    Aabb2 rect() const { return {min_x, max_x, min_y, max_y}; }
    bool valid() const { return min_x < max_x && min_y < max_y; }
};

struct PlacedObject {
    std::string id;
    const AssetRecord* asset = nullptr;  // owned by the catalog, which outlives scenes
    Pose pose;
    double mass = 1.0;
    double friction = 0.5;
    Vec3 com_shift;       // offset from the geometric centroid, asset frame
    Vec2 tilt;            // small tilt (rot about x, rot about y) entering COM projection

    Footprint footprint() const { return asset->footprint_world(pose); }

    // World center of mass.  Tilt shifts the COM laterally to first order:
    // rotating by (tilt.x, tilt.y) moves a point at height h by (tilt.y*h, -tilt.x*h).
    Vec3 world_com() const {
        const Vec3 local = shape_centroid(asset->shape) + com_shift;
        const Vec2 xy = rotate({local.x, local.y}, asset->effective_rotation(pose.yaw));
        Vec3 com = pose.position + Vec3{xy.x, xy.y, local.z};
        com.x += tilt.y * local.z;
        com.y -= tilt.x * local.z;
        return com;
    }

    Aabb3 world_aabb() const {
        const Aabb3 r = asset->rotated_aabb(pose.yaw);
        return {r.min + pose.position, r.max + pose.position};
    }
};

// Supporter -> supported contact relations from the last settle; index -1 is
// the root surface.
struct SupportGraph {
    std::vector<std::pair<int, int>> edges;

    void clear() { edges.clear(); }
    std::vector<int> supported_by(int supporter) const;
    std::vector<int> supporters_of(int object) const;
    // object plus everything transitively resting on it.
    std::vector<int> subtree(int object) const;
};

struct SceneState {
    Bounds2D bounds;
    std::vector<PlacedObject> objects;
    SupportGraph support;

    int index_of(std::string_view id) const;
};

// Knobs shared by the solvers; resolution/k values follow the scene style
// (0.01 m default, 0.03 m for large ground scenes, k = 5 for messy container
// fills).
struct SolveConfig {
    double resolution = 0.01;
    int k_bottom = 1;
    int k_search = 1;
    double epsilon = 1e-4;          // spatial penalty acceptance threshold, m^2
    int max_physics_trials = 25;    // settle attempts per placement request
    int place_in_retries = 10;
    double retrieval_threshold = 0.3;

    double displacement_delta() const { return 2.0 * resolution; }

    static double auto_resolution(const Bounds2D& bounds) {
        return bounds.shortest_dimension() >= 2.0 ? 0.03 : 0.01;
    }
};

uint64_t fnv1a64(std::string_view text);

struct Provenance {
    uint64_t program_hash = 0;
    uint64_t seed = 0;
    SolveConfig config;
};

class SceneFileError : public std::runtime_error {
  public:
    explicit SceneFileError(const std::string& what) : std::runtime_error(what) {}
};

// Scene file JSON, version 1: {version, bounds, objects, provenance}.
// Serialization is key-sorted and shortest-round-trip formatted, so equal
// scenes produce byte-identical files.
std::string save_scene(const SceneState& scene, const Provenance& provenance);
SceneState load_scene(const std::string& text, const AssetCatalog& catalog, Provenance* provenance = nullptr);

}  // namespace scenesmith
