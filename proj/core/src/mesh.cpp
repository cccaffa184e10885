#include "scenesmith/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace scenesmith {

Aabb3 TriMesh::aabb() const {
    if (vertices.empty()) throw MeshError("aabb of empty mesh");
    Aabb3 box{vertices[0], vertices[0]};
    for (const Vec3& v : vertices) {
        box.min.x = std::min(box.min.x, v.x);
        box.min.y = std::min(box.min.y, v.y);
        box.min.z = std::min(box.min.z, v.z);
        box.max.x = std::max(box.max.x, v.x);
        box.max.y = std::max(box.max.y, v.y);
        box.max.z = std::max(box.max.z, v.z);
    }
    return box;
}

std::vector<double> TriMesh::z_crossings(double x, double y) const {
    const double qx = x + 1.2345e-9;
    const double qy = y + 2.3456e-9;
    std::vector<double> zs;
    for (const auto& t : triangles) {
        const Vec3& a = vertices[t[0]];
        const Vec3& b = vertices[t[1]];
        const Vec3& c = vertices[t[2]];
        const Vec2 pa{a.x - qx, a.y - qy};
        const Vec2 pb{b.x - qx, b.y - qy};
        const Vec2 pc{c.x - qx, c.y - qy};
        const double d0 = pa.cross(pb);
        const double d1 = pb.cross(pc);
        const double d2 = pc.cross(pa);
        const bool pos = d0 > 0 && d1 > 0 && d2 > 0;
        const bool neg = d0 < 0 && d1 < 0 && d2 < 0;
        if (!pos && !neg) continue;
        const double denom = d0 + d1 + d2;
        // Barycentric weights: d1 for a, d2 for b, d0 for c.
        zs.push_back((d1 * a.z + d2 * b.z + d0 * c.z) / denom);
    }
    std::sort(zs.begin(), zs.end());
    return zs;
}

std::vector<std::pair<double, double>> TriMesh::z_intervals(double x, double y, bool* odd_parity) const {
    std::vector<double> zs = z_crossings(x, y);
    if (odd_parity) *odd_parity = (zs.size() % 2) != 0;
    if (zs.size() % 2 != 0) zs.pop_back();
    std::vector<std::pair<double, double>> out;
    for (size_t i = 0; i + 1 < zs.size(); i += 2) out.emplace_back(zs[i], zs[i + 1]);
    return out;
}

TriMesh parse_obj(const std::string& text, const std::string& origin_label) {
    TriMesh mesh;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Vec3 v;
            if (!(ls >> v.x >> v.y >> v.z))
                throw MeshError(origin_label + ":" + std::to_string(line_no) + ": malformed vertex");
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) {
                // "i", "i/j", "i//k", "i/j/k"; negative = relative to end.
                const size_t slash = tok.find('/');
                const std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
                int i = 0;
                try {
                    i = std::stoi(head);
                } catch (const std::exception&) {
                    throw MeshError(origin_label + ":" + std::to_string(line_no) + ": malformed face index '" + tok + "'");
                }
                if (i < 0) i = static_cast<int>(mesh.vertices.size()) + i;
                else i -= 1;
                if (i < 0 || i >= static_cast<int>(mesh.vertices.size()))
                    throw MeshError(origin_label + ":" + std::to_string(line_no) + ": face index out of range");
                idx.push_back(i);
            }
            if (idx.size() < 3)
                throw MeshError(origin_label + ":" + std::to_string(line_no) + ": face with fewer than 3 vertices");
            for (size_t k = 1; k + 1 < idx.size(); ++k)
                mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
        }
    }
    if (mesh.vertices.empty() || mesh.triangles.empty())
        throw MeshError(origin_label + ": no geometry found");
    return mesh;
}

TriMesh load_obj(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw MeshError("cannot open mesh file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_obj(buf.str(), path);
}

}  // namespace scenesmith
