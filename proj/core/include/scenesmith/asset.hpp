#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "scenesmith/geometry.hpp"
#include "scenesmith/mesh.hpp"
#include "scenesmith/rng.hpp"

namespace scenesmith {

class CatalogError : public std::runtime_error {
  public:
    explicit CatalogError(const std::string& what) : std::runtime_error(what) {}
};

// Primitive shapes sit with their base at z = 0 and their footprint centroid
// at the local origin.  Meshes keep their authored coordinates.
struct BoxShape {
    double size_x = 0, size_y = 0, size_z = 0;
};
struct CylinderShape {
    double radius = 0, height = 0;
};
struct SphereShape {
    double radius = 0;
};
struct MeshShape {
    TriMesh mesh;
    std::string source;
};

using ShapeGeometry = std::variant<BoxShape, CylinderShape, SphereShape, MeshShape>;

Aabb3 shape_aabb(const ShapeGeometry& shape);
Vec3 shape_centroid(const ShapeGeometry& shape);
// Solid intervals along the vertical column through local (x, y).
std::vector<std::pair<double, double>> shape_z_intervals(const ShapeGeometry& shape, double x, double y,
                                                         bool* odd_parity = nullptr);

struct ValueRange {
    double lo = 0, hi = 0;
    double sample(Rng& rng) const { return lo >= hi ? lo : lo + (hi - lo) * rng.uniform01(); }
};

struct AssetRecord {
    std::string id;
    std::string description;
    ShapeGeometry shape;
    // Mesh-frame correction: the asset's authored front differs from +x by
    // front_yaw, so the effective rotation of the geometry is pose.yaw + front_yaw.
    double front_yaw = 0.0;
    double supporting_probability = 1.0;
    ValueRange mass_range{1.0, 1.0};
    ValueRange friction_range{0.5, 0.5};
    std::array<ValueRange, 3> com_shift_range{};

    // Convex outline of the unrotated footprint, local frame (circles are
    // regular 32-gons).  Cached at load.
    std::vector<Vec2> base_outline;

    Aabb3 local_aabb() const { return shape_aabb(shape); }
    double effective_rotation(double pose_yaw) const { return pose_yaw + front_yaw; }
    // Footprint in the frame of an object posed with the given yaw, centered
    // at the local origin (translate by pose.position.xy for world space).
    Footprint footprint_local(double pose_yaw) const;
    Footprint footprint_world(const Pose& pose) const;
    // AABB of the rotated shape, before translation.
    Aabb3 rotated_aabb(double pose_yaw) const;
    double height() const {
        const Aabb3 box = local_aabb();
        return box.max.z - box.min.z;
    }
};

struct PhysicalSample {
    double mass = 1.0;
    double friction = 0.5;
    Vec3 com_shift;
};

// Draw order is fixed (mass, friction, com x/y/z) so seeds reproduce.
PhysicalSample sample_physical(const AssetRecord& asset, Rng& rng);

struct AssetCatalog {
    std::vector<AssetRecord> assets;

    const AssetRecord* find(const std::string& id) const;
};

// Manifest JSON:
//   {"assets":[{"id":..., "description":..., "shape":{"primitive":{"type":"box",...}}
//               or {"mesh":"relative/path.obj"}, optional front_yaw,
//               supporting_probability, mass_range, friction_range,
//               com_shift_range}]}
// Mesh paths resolve relative to the manifest's directory.
AssetCatalog load_catalog(const std::string& manifest_path);
AssetCatalog parse_catalog(const std::string& manifest_text, const std::string& base_dir);

struct RetrievalResult {
    const AssetRecord* asset = nullptr;  // null when best_score < threshold
    double best_score = 0.0;
    std::string best_id;
};

// Token-multiset cosine similarity between the query and each description;
// ties break to the lexicographically smallest id.
RetrievalResult retrieve(const AssetCatalog& catalog, const std::string& query, double threshold = 0.3);

}  // namespace scenesmith
