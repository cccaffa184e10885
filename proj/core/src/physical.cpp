#include "scenesmith/physical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "scenesmith/geometry.hpp"
#include "scenesmith/rng.hpp"

namespace scenesmith {

const char* placement_error_name(PlacementError::Kind kind) {
    switch (kind) {
        case PlacementError::Kind::NoFeasiblePlacement: return "NoFeasiblePlacement";
        case PlacementError::Kind::PhysicsRejection: return "PhysicsRejection";
        case PlacementError::Kind::TargetMissing: return "TargetMissing";
        case PlacementError::Kind::ContainerHasNoCavity: return "ContainerHasNoCavity";
    }
    return "PlacementError";
}

namespace {

constexpr int16_t kRootOwner = -1;
constexpr int16_t kNoOwner = -2;
constexpr double kTau = 6.28318530717958647692;

// Scene occupancy on a lattice anchored at the bounds minimum, with two root
// layers directly below top_z and an owner label per voxel.
struct SceneOccupancy {
    OccupancyGrid grid;
    std::vector<int16_t> owner;

    int16_t owner_at(int i, int j, int k) const {
        return owner[(static_cast<size_t>(i) * grid.ny + j) * grid.nz + k];
    }
    void set_owner(int i, int j, int k, int16_t label) {
        int16_t& o = owner[(static_cast<size_t>(i) * grid.ny + j) * grid.nz + k];
        if (o == kNoOwner) o = label;
    }
};

void stamp_object(SceneOccupancy& occ, const PlacedObject& obj, int16_t label) {
    OccupancyGrid& g = occ.grid;
    const Aabb3 wb = obj.world_aabb();
    const int ix0 = std::max(0, static_cast<int>(std::floor((wb.min.x - g.origin.x) / g.resolution)) - 1);
    const int ix1 =
        std::min(g.nx - 1, static_cast<int>(std::ceil((wb.max.x - g.origin.x) / g.resolution)) + 1);
    const int iy0 = std::max(0, static_cast<int>(std::floor((wb.min.y - g.origin.y) / g.resolution)) - 1);
    const int iy1 =
        std::min(g.ny - 1, static_cast<int>(std::ceil((wb.max.y - g.origin.y) / g.resolution)) + 1);
    const double eff = obj.asset->effective_rotation(obj.pose.yaw);
    for (int i = ix0; i <= ix1; ++i) {
        for (int j = iy0; j <= iy1; ++j) {
            const Vec3 center = g.voxel_center(i, j, 0);
            const Vec2 local =
                rotate({center.x - obj.pose.position.x, center.y - obj.pose.position.y}, -eff);
            const auto intervals = shape_z_intervals(obj.asset->shape, local.x, local.y);
            if (intervals.empty()) continue;
            for (const auto& [lo, hi] : intervals) {
                const double wlo = obj.pose.position.z + lo;
                const double whi = obj.pose.position.z + hi;
                const int k0 = std::max(
                    0, static_cast<int>(std::ceil((wlo - g.origin.z) / g.resolution - 0.5 - 1e-12)));
                const int k1 =
                    std::min(g.nz - 1, static_cast<int>(std::floor((whi - g.origin.z) / g.resolution -
                                                                   0.5 - 1e-12)));
                for (int k = k0; k <= k1; ++k) {
                    g.set(i, j, k);
                    occ.set_owner(i, j, k, label);
                }
            }
        }
    }
}

SceneOccupancy build_scene_occupancy(const SceneState& scene, double res, double needed_top) {
    const Bounds2D& b = scene.bounds;
    double top = std::max(b.top_z, needed_top);
    for (const PlacedObject& o : scene.objects) top = std::max(top, o.world_aabb().max.z);

    SceneOccupancy occ;
    const Vec3 origin{b.min_x, b.min_y, b.top_z - 2.0 * res};
    const int nx = std::max(1, static_cast<int>(std::ceil(b.width_x() / res - 1e-9)));
    const int ny = std::max(1, static_cast<int>(std::ceil(b.width_y() / res - 1e-9)));
    const int nz = 2 + std::max(1, static_cast<int>(std::ceil((top - b.top_z) / res - 1e-9))) + 1;
    occ.grid = OccupancyGrid::make(origin, res, nx, ny, nz);
    occ.owner.assign(static_cast<size_t>(nx) * ny * nz, kNoOwner);

    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < 2; ++k) {
                occ.grid.set(i, j, k);
                occ.set_owner(i, j, k, kRootOwner);
            }
    // Owner labels are int16; indices above 32766 would alias the sentinels.
    if (scene.objects.size() > 32766)
        throw std::length_error("scene has too many objects for owner labeling");
    for (size_t oi = 0; oi < scene.objects.size(); ++oi)
        stamp_object(occ, scene.objects[oi], static_cast<int16_t>(oi));
    return occ;
}

// Distance from a point to the boundary of a contact hull (degenerate hulls
// are their own boundary).
double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    const double t = len2 <= 0 ? 0.0 : std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

double hull_edge_distance(const std::vector<Vec2>& hull, Vec2 p) {
    if (hull.size() < 2) return hull.empty() ? 0.0 : (p - hull.front()).norm();
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < hull.size(); ++i)
        best = std::min(best, segment_distance(p, hull[i], hull[(i + 1) % hull.size()]));
    return best;
}

double supporter_probability(const SceneState& scene, int16_t owner) {
    if (owner == kRootOwner) return 1.0;
    return scene.objects[owner].asset->supporting_probability;
}

struct CandidateContext {
    SceneOccupancy occ;
    OccupancyGrid object_grid;
    Vec3 base_position;  // pose.position for offset (0,0,0)
};

// Voxelizes the object so its lattice coincides with the scene lattice; the
// pose for offset t is then base_position + res * t exactly.
CandidateContext make_context(const SceneState& scene, const PlacedObject& proto,
                              const SolveConfig& config) {
    CandidateContext ctx;
    const double res = config.resolution;
    const double obj_height = proto.asset->height();
    double scene_top = scene.bounds.top_z;
    for (const PlacedObject& o : scene.objects) scene_top = std::max(scene_top, o.world_aabb().max.z);
    ctx.occ = build_scene_occupancy(scene, res, scene_top + obj_height + 2.0 * res);

    const OccupancyGrid probe = voxelize(*proto.asset, Pose{{0, 0, 0}, proto.pose.yaw}, res);
    const Vec3 d = probe.origin - ctx.occ.grid.origin;
    const Vec3 snap{res * std::round(d.x / res) - d.x, res * std::round(d.y / res) - d.y,
                    res * std::round(d.z / res) - d.z};
    ctx.object_grid = voxelize(*proto.asset, Pose{snap, proto.pose.yaw}, res);
    // Re-anchor so offset arithmetic stays exact.
    ctx.object_grid.origin = ctx.occ.grid.origin;
    ctx.base_position = snap - Vec3{res * std::round(d.x / res), res * std::round(d.y / res),
                                    res * std::round(d.z / res)};
    return ctx;
}

}  // namespace

std::vector<PlacementCandidate> place_candidates(const SceneState& scene, const PlacedObject& proto,
                                                 const PlacementRequest& request,
                                                 const SolveConfig& config) {
    const bool on_target = request.relation == Relation::PlaceOn;
    int target_index = -1;
    Vec2 target_center{0, 0};
    double target_wx = 1.0, target_wy = 1.0;
    if (on_target) {
        target_index = scene.index_of(request.target);
        if (target_index < 0)
            throw PlacementError(PlacementError::Kind::TargetMissing,
                                 "PLACE-ON target '" + request.target + "' is not in the scene");
        const Aabb2 tb = scene.objects[target_index].world_aabb().xy();
        target_center = tb.center();
        target_wx = std::max(tb.width_x(), 1e-9);
        target_wy = std::max(tb.width_y(), 1e-9);
    }

    CandidateContext ctx = make_context(scene, proto, config);
    const OccupancyGrid& og = ctx.object_grid;
    const OccupancyGrid& sg = ctx.occ.grid;
    const double res = config.resolution;

    const SurfaceMask bottom = bottom_surface(og, config.k_bottom);
    const size_t bottom_count = bottom.count();
    std::vector<PlacementCandidate> out;
    if (bottom_count == 0) return out;

    const Aabb2 rb = proto.asset->rotated_aabb(proto.pose.yaw).xy();
    const double half_extent = std::max(0.5 * std::max(rb.width_x(), rb.width_y()), 1e-9);
    const Vec3 local_com = shape_centroid(proto.asset->shape) + proto.com_shift;
    const double eff = proto.asset->effective_rotation(proto.pose.yaw);
    const Vec2 com_rot = rotate(local_com.xy(), eff);
    const Vec2 com_tilt{proto.tilt.y * local_com.z, -proto.tilt.x * local_com.z};
    const Aabb2 obj_box = rb;  // bbox-center offset is measured between AABB centers

    for (const GridIndex& t : feasible_offsets(sg, og)) {
        const SurfaceMask contact = contact_surface(og, t, sg, config.k_bottom, config.k_search);
        const size_t contact_count = contact.count();
        if (contact_count == 0) continue;

        // Owner of each contact cell: the first occupied scene voxel within
        // k_search below the column's own lowest object voxel.
        bool owners_ok = true;
        double prob_sum = 0.0;
        for (int i = 0; i < og.nx && owners_ok; ++i) {
            for (int j = 0; j < og.ny && owners_ok; ++j) {
                if (!contact.at(i, j)) continue;
                const int low = og.column_lowest(i, j) + t.z;
                int16_t owner = kNoOwner;
                for (int dk = 1; dk <= config.k_search; ++dk) {
                    const int k = low - dk;
                    if (k < 0 || k >= sg.nz) continue;
                    if (sg.occupied(i + t.x, j + t.y, k)) {
                        owner = ctx.occ.owner_at(i + t.x, j + t.y, k);
                        break;
                    }
                }
                if (on_target) {
                    owners_ok = owner == static_cast<int16_t>(target_index);
                } else {
                    const double p = supporter_probability(scene, owner);
                    owners_ok = p > 0.0;
                    prob_sum += p;
                }
            }
        }
        if (!owners_ok) continue;

        PlacementCandidate cand;
        cand.offset = t;
        cand.pose.position = ctx.base_position + Vec3{res * t.x, res * t.y, res * t.z};
        cand.pose.yaw = proto.pose.yaw;
        const Vec2 com_xy =
            Vec2{cand.pose.position.x, cand.pose.position.y} + com_rot + com_tilt;
        if (!support_valid(contact, com_xy)) continue;

        cand.support_ratio = static_cast<double>(contact_count) / static_cast<double>(bottom_count);
        cand.supporter_probability =
            on_target ? 1.0 : prob_sum / static_cast<double>(contact_count);

        double score = 0.0;
        if (on_target) {
            // Unset offsets request 0, so a bare PLACE-ON centers on the target.
            const Vec2 center{cand.pose.position.x + (obj_box.min_x + obj_box.max_x) * 0.5,
                              cand.pose.position.y + (obj_box.min_y + obj_box.max_y) * 0.5};
            score -= std::abs((center.x - target_center.x) - request.x_offset.value_or(0.0)) / target_wx;
            score -= std::abs((center.y - target_center.y) - request.y_offset.value_or(0.0)) / target_wy;
        }
        if (request.overlap) score -= std::abs(cand.support_ratio - *request.overlap);
        if (request.want_unstable)
            score -= hull_edge_distance(hull_or_degenerate(contact.centers()), com_xy) / half_extent;
        if (!on_target) score += cand.supporter_probability;
        cand.score = score;
        out.push_back(std::move(cand));
    }

    std::stable_sort(out.begin(), out.end(),
                     [](const PlacementCandidate& a, const PlacementCandidate& b) { return a.score > b.score; });
    return out;
}

namespace {

PlacementOutcome try_candidates(SceneState& scene, const PlacedObject& proto,
                                const std::vector<PlacementCandidate>& candidates,
                                const std::vector<size_t>& order, const SolveConfig& config,
                                SimulationBackend& backend) {
    const double delta = config.displacement_delta() + 1e-12;
    int tried = 0;
    for (size_t ci : order) {
        if (tried >= config.max_physics_trials) break;
        ++tried;
        const PlacementCandidate& cand = candidates[ci];
        SceneState trial = scene;
        PlacedObject placed = proto;
        placed.pose = cand.pose;
        trial.objects.push_back(placed);
        const SettleResult settled = backend.settle(trial, 400);
        const SettleEntry& self = settled.objects.back();
        bool ok = !self.fell && self.displacement <= delta;
        for (size_t i = 0; ok && i + 1 < settled.objects.size(); ++i)
            ok = !settled.objects[i].fell && settled.objects[i].displacement <= delta;
        if (ok) {
            scene = std::move(trial);
            return {scene.objects.back().pose, cand.support_ratio,
                    static_cast<int>(candidates.size()), tried};
        }
    }
    throw PlacementError(PlacementError::Kind::PhysicsRejection,
                         "all " + std::to_string(tried) + " tried candidates displaced beyond " +
                             std::to_string(config.displacement_delta()) + " m",
                         tried, static_cast<int>(candidates.size()));
}

}  // namespace

PlacementOutcome solve_place_on(SceneState& scene, const PlacedObject& proto,
                                const PlacementRequest& request, const SolveConfig& config,
                                SimulationBackend& backend, uint64_t /*seed*/) {
    const int target_index = scene.index_of(request.target);
    if (target_index < 0)
        throw PlacementError(PlacementError::Kind::TargetMissing,
                             "PLACE-ON target '" + request.target + "' is not in the scene");
    if (scene.objects[target_index].asset->supporting_probability <= 0.0)
        throw PlacementError(PlacementError::Kind::NoFeasiblePlacement,
                             "target '" + request.target + "' cannot support objects");

    const std::vector<PlacementCandidate> candidates = place_candidates(scene, proto, request, config);
    if (candidates.empty())
        throw PlacementError(PlacementError::Kind::NoFeasiblePlacement,
                             "no collision-free supported pose on '" + request.target + "' for '" +
                                 proto.id + "'");
    std::vector<size_t> order(candidates.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    return try_candidates(scene, proto, candidates, order, config, backend);
}

PlacementOutcome solve_place_anywhere(SceneState& scene, const PlacedObject& proto,
                                      const PlacementRequest& request, const SolveConfig& config,
                                      SimulationBackend& backend, uint64_t seed) {
    const std::vector<PlacementCandidate> candidates = place_candidates(scene, proto, request, config);
    if (candidates.empty())
        throw PlacementError(PlacementError::Kind::NoFeasiblePlacement,
                             "no collision-free supported pose anywhere for '" + proto.id + "'");

    std::vector<size_t> order(candidates.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Top decile by score value; candidates tying with the boundary score
    // stay in the pool, so an all-tied table keeps the pick uniform over it.
    const size_t decile = std::max<size_t>(1, (candidates.size() + 9) / 10);
    const double cutoff = candidates[decile - 1].score - 1e-12;
    size_t pool = decile;
    while (pool < candidates.size() && candidates[pool].score >= cutoff) ++pool;
    Rng rng = Rng(seed).fork(0x616e79);
    for (size_t i = pool - 1; i > 0; --i)
        std::swap(order[i], order[rng.below(i + 1)]);
    return try_candidates(scene, proto, candidates, order, config, backend);
}

namespace {

struct Cavity {
    OccupancyGrid grid;                        // container voxelization
    std::vector<std::pair<int, int>> cells;    // interior columns holding a floor below the rim
    Aabb2 box;                                 // container footprint AABB, world
    double top = 0.0;                          // container AABB top, world
};

Cavity analyze_cavity(const SceneState& scene, const std::string& container_id, const SolveConfig& config) {
    const int container_index = scene.index_of(container_id);
    if (container_index < 0)
        throw PlacementError(PlacementError::Kind::TargetMissing,
                             "PLACE-IN container '" + container_id + "' is not in the scene");
    const PlacedObject& container = scene.objects[container_index];

    Cavity cavity;
    cavity.grid = voxelize(*container.asset, container.pose, config.resolution);
    const OccupancyGrid& cg = cavity.grid;
    int rim = -1;
    for (int i = 0; i < cg.nx; ++i)
        for (int j = 0; j < cg.ny; ++j) rim = std::max(rim, cg.column_highest(i, j));
    for (int i = 0; i < cg.nx; ++i)
        for (int j = 0; j < cg.ny; ++j) {
            const int high = cg.column_highest(i, j);
            if (high >= 0 && high < rim) cavity.cells.emplace_back(i, j);
        }
    if (cavity.cells.empty())
        throw PlacementError(PlacementError::Kind::ContainerHasNoCavity,
                             "container '" + container_id + "' has no open interior below its rim");
    cavity.box = container.world_aabb().xy();
    cavity.top = container.world_aabb().max.z;
    return cavity;
}

// One seeded drop attempt over the cavity; on success `scene` absorbs the
// settled trial.  `drop` already carries id, asset, and physical sample.
bool drop_into_cavity(SceneState& scene, PlacedObject drop, const Cavity& cavity,
                      const SolveConfig& config, SimulationBackend& backend, Rng& rng) {
    const double res = config.resolution;
    const double delta = config.displacement_delta() + 1e-12;
    const auto [ci, cj] = cavity.cells[rng.below(cavity.cells.size())];
    const Vec3 cell = cavity.grid.voxel_center(ci, cj, 0);
    drop.pose.position = {cell.x + rng.uniform(-res * 0.5, res * 0.5),
                          cell.y + rng.uniform(-res * 0.5, res * 0.5), 0.0};
    drop.pose.yaw = rng.uniform(0.0, kTau);
    drop.pose.position.z = cavity.top + 2.0 * res - drop.asset->local_aabb().min.z;

    SceneState trial = scene;
    trial.objects.push_back(drop);
    const SettleResult settled = backend.settle(trial, 400);
    const SettleEntry& self = settled.objects.back();
    bool ok = !self.fell;
    const Aabb2 rest = trial.objects.back().world_aabb().xy();
    ok = ok && rest.min_x >= cavity.box.min_x - 1e-9 && rest.max_x <= cavity.box.max_x + 1e-9 &&
         rest.min_y >= cavity.box.min_y - 1e-9 && rest.max_y <= cavity.box.max_y + 1e-9;
    for (size_t i = 0; ok && i + 1 < settled.objects.size(); ++i)
        ok = !settled.objects[i].fell && settled.objects[i].displacement <= delta;
    if (ok) scene = std::move(trial);
    return ok;
}

}  // namespace

PlaceInResult solve_place_in(SceneState& scene, const std::string& container_id,
                             const std::vector<BatchItem>& batch, const AssetCatalog& catalog,
                             const SolveConfig& config, SimulationBackend& backend, uint64_t seed) {
    const Cavity cavity = analyze_cavity(scene, container_id, config);
    Rng rng = Rng(seed).fork(0x696e);
    PlaceInResult result;

    for (const BatchItem& item : batch) {
        const RetrievalResult retrieved = retrieve(catalog, item.category, config.retrieval_threshold);
        int k = 0;
        for (int n = 0; n < item.count; ++n) {
            std::string id = item.category + "_" + std::to_string(k);
            while (scene.index_of(id) >= 0) id = item.category + "_" + std::to_string(++k);
            ++k;
            if (!retrieved.asset) {
                result.failed.push_back(id);
                continue;
            }
            bool accepted = false;
            for (int attempt = 0; attempt < config.place_in_retries && !accepted; ++attempt) {
                PlacedObject drop;
                drop.id = id;
                drop.asset = retrieved.asset;
                const PhysicalSample sample = sample_physical(*retrieved.asset, rng);
                drop.mass = sample.mass;
                drop.friction = sample.friction;
                drop.com_shift = sample.com_shift;
                accepted = drop_into_cavity(scene, std::move(drop), cavity, config, backend, rng);
            }
            if (accepted)
                result.placed.push_back({id, item.category, scene.objects.back().pose});
            else
                result.failed.push_back(id);
        }
    }
    return result;
}

PlacementOutcome solve_place_in_single(SceneState& scene, const PlacedObject& proto,
                                       const std::string& container_id, const SolveConfig& config,
                                       SimulationBackend& backend, uint64_t seed) {
    const Cavity cavity = analyze_cavity(scene, container_id, config);
    Rng rng = Rng(seed).fork(0x696e);
    for (int attempt = 0; attempt < config.place_in_retries; ++attempt) {
        if (drop_into_cavity(scene, proto, cavity, config, backend, rng)) {
            PlacementOutcome outcome;
            outcome.pose = scene.objects.back().pose;
            outcome.candidates_total = config.place_in_retries;
            outcome.candidates_tried = attempt + 1;
            return outcome;
        }
    }
    throw PlacementError(PlacementError::Kind::PhysicsRejection,
                         "object '" + proto.id + "' never settled inside container '" + container_id + "'",
                         config.place_in_retries, config.place_in_retries);
}

}  // namespace scenesmith
