#include "scenesmith/scene.hpp"

#include <algorithm>

#include <json.hpp>

namespace scenesmith {

std::vector<int> SupportGraph::supported_by(int supporter) const {
    std::vector<int> out;
    for (const auto& [s, t] : edges)
        if (s == supporter) out.push_back(t);
    return out;
}

std::vector<int> SupportGraph::supporters_of(int object) const {
    std::vector<int> out;
    for (const auto& [s, t] : edges)
        if (t == object) out.push_back(s);
    return out;
}

std::vector<int> SupportGraph::subtree(int object) const {
    std::vector<int> out{object};
    for (size_t cursor = 0; cursor < out.size(); ++cursor) {
        for (const auto& [s, t] : edges) {
            if (s != out[cursor]) continue;
            if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
        }
    }
    return out;
}

int SceneState::index_of(std::string_view id) const {
    for (size_t i = 0; i < objects.size(); ++i)
        if (objects[i].id == id) return static_cast<int>(i);
    return -1;
}

uint64_t fnv1a64(std::string_view text) {
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

std::string hash_hex(uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

uint64_t hash_from_hex(const std::string& s) {
    uint64_t h = 0;
    for (char c : s) {
        h <<= 4;
        if (c >= '0' && c <= '9') h |= static_cast<uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') h |= static_cast<uint64_t>(c - 'a' + 10);
        else throw SceneFileError("bad hash digit in provenance");
    }
    return h;
}

}  // namespace

std::string save_scene(const SceneState& scene, const Provenance& provenance) {
    nlohmann::json j;
    j["version"] = 1;
    j["bounds"] = {{"min_x", scene.bounds.min_x}, {"max_x", scene.bounds.max_x},
                   {"min_y", scene.bounds.min_y}, {"max_y", scene.bounds.max_y},
                   {"top_z", scene.bounds.top_z}};
    nlohmann::json objs = nlohmann::json::array();
    for (const PlacedObject& o : scene.objects) {
        objs.push_back({{"id", o.id},
                        {"asset_id", o.asset->id},
                        {"position", {o.pose.position.x, o.pose.position.y, o.pose.position.z}},
                        {"yaw", o.pose.yaw},
                        {"mass", o.mass},
                        {"friction", o.friction},
                        {"com_shift", {o.com_shift.x, o.com_shift.y, o.com_shift.z}}});
    }
    j["objects"] = objs;
    j["provenance"] = {{"program_hash", hash_hex(provenance.program_hash)},
                       {"seed", provenance.seed},
                       {"config",
                        {{"resolution", provenance.config.resolution},
                         {"k_bottom", provenance.config.k_bottom},
                         {"k_search", provenance.config.k_search},
                         {"epsilon", provenance.config.epsilon}}}};
    return j.dump(2) + "\n";
}

SceneState load_scene(const std::string& text, const AssetCatalog& catalog, Provenance* provenance) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SceneFileError(std::string("scene file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("version", 0) != 1)
        throw SceneFileError("unsupported scene file version");

    SceneState scene;
    const nlohmann::json& b = j.at("bounds");
    scene.bounds = {b.at("min_x").get<double>(), b.at("max_x").get<double>(),
                    b.at("min_y").get<double>(), b.at("max_y").get<double>(),
                    b.at("top_z").get<double>()};
    for (const nlohmann::json& o : j.at("objects")) {
        PlacedObject obj;
        obj.id = o.at("id").get<std::string>();
        const std::string asset_id = o.at("asset_id").get<std::string>();
        obj.asset = catalog.find(asset_id);
        if (!obj.asset) throw SceneFileError("scene references unknown asset '" + asset_id + "'");
        const auto& p = o.at("position");
        obj.pose.position = {p[0].get<double>(), p[1].get<double>(), p[2].get<double>()};
        obj.pose.yaw = o.at("yaw").get<double>();
        obj.mass = o.at("mass").get<double>();
        obj.friction = o.at("friction").get<double>();
        const auto& cs = o.at("com_shift");
        obj.com_shift = {cs[0].get<double>(), cs[1].get<double>(), cs[2].get<double>()};
        scene.objects.push_back(std::move(obj));
    }
    if (provenance && j.contains("provenance")) {
        const nlohmann::json& pv = j.at("provenance");
        provenance->program_hash = hash_from_hex(pv.value("program_hash", "0"));
        provenance->seed = pv.value("seed", 0ULL);
        if (pv.contains("config")) {
            const nlohmann::json& c = pv.at("config");
            provenance->config.resolution = c.value("resolution", 0.01);
            provenance->config.k_bottom = c.value("k_bottom", 1);
            provenance->config.k_search = c.value("k_search", 1);
            provenance->config.epsilon = c.value("epsilon", 1e-4);
        }
    }
    return scene;
}

}  // namespace scenesmith
