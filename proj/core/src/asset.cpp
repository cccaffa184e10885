#include "scenesmith/asset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace scenesmith {

namespace {

constexpr int kCircleSides = 32;
constexpr double kPi = 3.14159265358979323846;

std::vector<Vec2> circle_outline(double radius) {
    std::vector<Vec2> pts;
    pts.reserve(kCircleSides);
    for (int i = 0; i < kCircleSides; ++i) {
        const double a = 2.0 * kPi * i / kCircleSides;
        pts.push_back({radius * std::cos(a), radius * std::sin(a)});
    }
    return pts;
}

}  // namespace

Aabb3 shape_aabb(const ShapeGeometry& shape) {
    return std::visit(
        [](const auto& s) -> Aabb3 {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, BoxShape>)
                return {{-s.size_x / 2, -s.size_y / 2, 0.0}, {s.size_x / 2, s.size_y / 2, s.size_z}};
            else if constexpr (std::is_same_v<T, CylinderShape>)
                return {{-s.radius, -s.radius, 0.0}, {s.radius, s.radius, s.height}};
            else if constexpr (std::is_same_v<T, SphereShape>)
                return {{-s.radius, -s.radius, 0.0}, {s.radius, s.radius, 2 * s.radius}};
            else
                return s.mesh.aabb();
        },
        shape);
}

Vec3 shape_centroid(const ShapeGeometry& shape) {
    return std::visit(
        [](const auto& s) -> Vec3 {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, BoxShape>)
                return {0.0, 0.0, s.size_z / 2};
            else if constexpr (std::is_same_v<T, CylinderShape>)
                return {0.0, 0.0, s.height / 2};
            else if constexpr (std::is_same_v<T, SphereShape>)
                return {0.0, 0.0, s.radius};
            else {
                // Volume centroid by signed tetrahedra against the origin;
                // falls back to the vertex mean for near-zero volume.
                const TriMesh& m = s.mesh;
                double vol6 = 0.0;
                Vec3 acc{};
                for (const auto& t : m.triangles) {
                    const Vec3& a = m.vertices[t[0]];
                    const Vec3& b = m.vertices[t[1]];
                    const Vec3& c = m.vertices[t[2]];
                    const double v = a.x * (b.y * c.z - b.z * c.y) - a.y * (b.x * c.z - b.z * c.x) +
                                     a.z * (b.x * c.y - b.y * c.x);
                    vol6 += v;
                    acc = acc + (a + b + c) * (v * 0.25);
                }
                if (std::abs(vol6) < 1e-300) {
                    Vec3 mean{};
                    for (const Vec3& v : m.vertices) mean = mean + v;
                    return mean * (1.0 / static_cast<double>(m.vertices.size()));
                }
                return acc * (1.0 / vol6);
            }
        },
        shape);
}

std::vector<std::pair<double, double>> shape_z_intervals(const ShapeGeometry& shape, double x, double y,
                                                         bool* odd_parity) {
    if (odd_parity) *odd_parity = false;
    return std::visit(
        [&](const auto& s) -> std::vector<std::pair<double, double>> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, BoxShape>) {
                if (std::abs(x) <= s.size_x / 2 && std::abs(y) <= s.size_y / 2) return {{0.0, s.size_z}};
                return {};
            } else if constexpr (std::is_same_v<T, CylinderShape>) {
                if (x * x + y * y <= s.radius * s.radius) return {{0.0, s.height}};
                return {};
            } else if constexpr (std::is_same_v<T, SphereShape>) {
                const double d2 = s.radius * s.radius - x * x - y * y;
                if (d2 < 0) return {};
                const double h = std::sqrt(d2);
                return {{s.radius - h, s.radius + h}};
            } else {
                return s.mesh.z_intervals(x, y, odd_parity);
            }
        },
        shape);
}

Footprint AssetRecord::footprint_local(double pose_yaw) const {
    const double rot = effective_rotation(pose_yaw);
    std::vector<Vec2> pts;
    pts.reserve(base_outline.size());
    for (Vec2 p : base_outline) pts.push_back(rotate(p, rot));
    return convex_hull_2d(pts);
}

Footprint AssetRecord::footprint_world(const Pose& pose) const {
    Footprint fp = footprint_local(pose.yaw);
    for (Vec2& p : fp.hull) p = p + pose.position.xy();
    return fp;
}

Aabb3 AssetRecord::rotated_aabb(double pose_yaw) const {
    const Aabb3 local = local_aabb();
    const Footprint fp = footprint_local(pose_yaw);
    const Aabb2 xy = fp.aabb();
    return {{xy.min_x, xy.min_y, local.min.z}, {xy.max_x, xy.max_y, local.max.z}};
}

PhysicalSample sample_physical(const AssetRecord& asset, Rng& rng) {
    PhysicalSample s;
    s.mass = asset.mass_range.sample(rng);
    s.friction = asset.friction_range.sample(rng);
    s.com_shift.x = asset.com_shift_range[0].sample(rng);
    s.com_shift.y = asset.com_shift_range[1].sample(rng);
    s.com_shift.z = asset.com_shift_range[2].sample(rng);
    return s;
}

const AssetRecord* AssetCatalog::find(const std::string& id) const {
    for (const AssetRecord& a : assets)
        if (a.id == id) return &a;
    return nullptr;
}

namespace {

ValueRange parse_range(const nlohmann::json& j, const std::string& asset_id, const std::string& field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw CatalogError("asset '" + asset_id + "': " + field + " must be [lo, hi]");
    ValueRange r{j[0].get<double>(), j[1].get<double>()};
    if (r.lo > r.hi) throw CatalogError("asset '" + asset_id + "': " + field + " has lo > hi");
    return r;
}

std::vector<Vec2> outline_for(const ShapeGeometry& shape) {
    return std::visit(
        [](const auto& s) -> std::vector<Vec2> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, BoxShape>) {
                const double hx = s.size_x / 2, hy = s.size_y / 2;
                return {{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}};
            } else if constexpr (std::is_same_v<T, CylinderShape>) {
                return circle_outline(s.radius);
            } else if constexpr (std::is_same_v<T, SphereShape>) {
                return circle_outline(s.radius);
            } else {
                std::vector<Vec2> pts;
                pts.reserve(s.mesh.vertices.size());
                for (const Vec3& v : s.mesh.vertices) pts.push_back({v.x, v.y});
                return convex_hull_2d(pts).hull;
            }
        },
        shape);
}

ShapeGeometry parse_shape(const nlohmann::json& j, const std::string& asset_id, const std::string& base_dir) {
    if (j.contains("mesh")) {
        const std::string rel = j.at("mesh").get<std::string>();
        const std::filesystem::path p = std::filesystem::path(base_dir) / rel;
        try {
            return MeshShape{load_obj(p.string()), rel};
        } catch (const MeshError& e) {
            throw CatalogError("asset '" + asset_id + "': " + e.what());
        }
    }
    if (!j.contains("primitive")) throw CatalogError("asset '" + asset_id + "': shape needs 'primitive' or 'mesh'");
    const nlohmann::json& p = j.at("primitive");
    const std::string type = p.value("type", "");
    auto pos = [&](const char* key) {
        if (!p.contains(key) || !p.at(key).is_number())
            throw CatalogError("asset '" + asset_id + "': primitive missing numeric '" + std::string(key) + "'");
        const double v = p.at(key).get<double>();
        if (v <= 0) throw CatalogError("asset '" + asset_id + "': primitive '" + std::string(key) + "' must be > 0");
        return v;
    };
    if (type == "box") return BoxShape{pos("size_x"), pos("size_y"), pos("size_z")};
    if (type == "cylinder") return CylinderShape{pos("radius"), pos("height")};
    if (type == "sphere") return SphereShape{pos("radius")};
    throw CatalogError("asset '" + asset_id + "': unknown primitive type '" + type + "'");
}

std::map<std::string, int> token_counts(const std::string& text) {
    std::map<std::string, int> counts;
    std::string tok;
    for (char ch : text) {
        const unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            tok.push_back(static_cast<char>(std::tolower(c)));
        } else if (!tok.empty()) {
            ++counts[tok];
            tok.clear();
        }
    }
    if (!tok.empty()) ++counts[tok];
    return counts;
}

double cosine(const std::map<std::string, int>& a, const std::map<std::string, int>& b) {
    if (a.empty() || b.empty()) return 0.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [tok, ca] : a) {
        na += static_cast<double>(ca) * ca;
        const auto it = b.find(tok);
        if (it != b.end()) dot += static_cast<double>(ca) * it->second;
    }
    for (const auto& [tok, cb] : b) nb += static_cast<double>(cb) * cb;
    if (dot == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

AssetCatalog parse_catalog(const std::string& manifest_text, const std::string& base_dir) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(manifest_text);
    } catch (const nlohmann::json::exception& e) {
        throw CatalogError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!root.is_object() || !root.contains("assets") || !root.at("assets").is_array())
        throw CatalogError("manifest must be an object with an 'assets' array");

    AssetCatalog catalog;
    for (const nlohmann::json& item : root.at("assets")) {
        AssetRecord rec;
        if (!item.contains("id") || !item.at("id").is_string())
            throw CatalogError("every asset needs a string 'id'");
        rec.id = item.at("id").get<std::string>();
        if (catalog.find(rec.id)) throw CatalogError("duplicate asset id '" + rec.id + "'");
        rec.description = item.value("description", rec.id);
        if (!item.contains("shape")) throw CatalogError("asset '" + rec.id + "': missing 'shape'");
        rec.shape = parse_shape(item.at("shape"), rec.id, base_dir);
        rec.front_yaw = item.value("front_yaw", 0.0);
        rec.supporting_probability = item.value("supporting_probability", 1.0);
        if (rec.supporting_probability < 0.0 || rec.supporting_probability > 1.0)
            throw CatalogError("asset '" + rec.id + "': supporting_probability outside [0, 1]");
        if (item.contains("mass_range")) rec.mass_range = parse_range(item.at("mass_range"), rec.id, "mass_range");
        if (rec.mass_range.lo <= 0) throw CatalogError("asset '" + rec.id + "': mass must be > 0");
        if (item.contains("friction_range"))
            rec.friction_range = parse_range(item.at("friction_range"), rec.id, "friction_range");
        if (rec.friction_range.lo < 0) throw CatalogError("asset '" + rec.id + "': friction must be >= 0");
        if (item.contains("com_shift_range")) {
            const nlohmann::json& cs = item.at("com_shift_range");
            if (!cs.is_array() || cs.size() != 3)
                throw CatalogError("asset '" + rec.id + "': com_shift_range must hold 3 ranges");
            for (int axis = 0; axis < 3; ++axis)
                rec.com_shift_range[axis] = parse_range(cs[axis], rec.id, "com_shift_range");
        }
        rec.base_outline = outline_for(rec.shape);
        catalog.assets.push_back(std::move(rec));
    }
    return catalog;
}

AssetCatalog load_catalog(const std::string& manifest_path) {
    std::ifstream f(manifest_path);
    if (!f) throw CatalogError("cannot open manifest: " + manifest_path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_catalog(buf.str(), std::filesystem::path(manifest_path).parent_path().string());
}

RetrievalResult retrieve(const AssetCatalog& catalog, const std::string& query, double threshold) {
    const std::map<std::string, int> q = token_counts(query);
    RetrievalResult best;
    for (const AssetRecord& a : catalog.assets) {
        const double score = cosine(q, token_counts(a.description));
        const bool wins = best.best_id.empty() || score > best.best_score ||
                          (score == best.best_score && a.id < best.best_id);
        if (wins) {
            best.best_score = score;
            best.best_id = a.id;
            best.asset = &a;
        }
    }
    if (best.best_score < threshold) best.asset = nullptr;
    return best;
}

}  // namespace scenesmith
