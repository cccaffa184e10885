// Acceptance gate: one criterion per numbered function, one PASS/FAIL line
// each on stdout, exit status 0 only when all eleven hold.  Every tolerance
// and budget is pinned as a constant next to the criterion that owns it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "scenesmith/agent.hpp"
#include "scenesmith/feedback.hpp"
#include "scenesmith/occupancy.hpp"
#include "scenesmith/physical.hpp"
#include "scenesmith/physics.hpp"
#include "scenesmith/predicate.hpp"
#include "scenesmith/rng.hpp"
#include "scenesmith/scene.hpp"
#include "scenesmith/spatial.hpp"
#include "scenesmith/stability.hpp"
#include "test_support.hpp"

using namespace scenesmith;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Pinned tolerances and budgets.
constexpr double kPoseTol = 1e-9;            // m / rad, criterion 1
constexpr double kSemanticsBudget = 5.0;     // s, criterion 1
constexpr int kEquivalenceScenes = 100;      // criterion 2
constexpr double kEquivalenceBudget = 120.0; // s, criterion 2
constexpr double kPenaltyTarget = 1e-4;      // m^2, criterion 3
constexpr double kSpatialBudget = 5.0;       // s, criterion 3
constexpr int kMonotoneSteps = 1000;         // criterion 4
constexpr double kEstimatorRelTol = 1e-12;   // criterion 6
constexpr int kClimbRuns = 20;               // criterion 7
constexpr int kClimbWins = 18;               // 90% of the runs
constexpr double kClimbBudget = 60.0;        // s, criterion 7
constexpr int kInfeasiblePrograms = 50;      // criterion 9
constexpr double kCapacityFraction = 0.5;    // criterion 11
constexpr double kCapacityBudget = 120.0;    // s, criterion 11

struct Check {
    int failed = 0;
    std::string first;

    void expect(bool ok, const std::string& what) {
        if (ok) return;
        ++failed;
        if (first.empty()) first = what;
    }
    bool ok() const { return failed == 0; }
};

size_t count_substr(const std::string& hay, const std::string& needle) {
    size_t n = 0;
    for (size_t at = hay.find(needle); at != std::string::npos; at = hay.find(needle, at + 1)) ++n;
    return n;
}

std::string fmt4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

EvaluatedLayout eval_program(const std::string& text, uint64_t seed,
                             Bounds2D bounds = test::table_bounds()) {
    const PredicateProgram program = parse_program(text);
    const ParamVector params = build_params(program, seed);
    const AssetBinding binding = bind_assets(program, test::fixture_catalog(), 0.3);
    return apply_predicates(program, params, binding, bounds, seed);
}

// ---------------------------------------------------------------------------
// Reference lattice, mask, and candidate enumerations: plain per-voxel loops
// rebuilt from the documented contracts, compared bit for bit against the
// library in criteria 2 and 8.

struct OracleScene {
    OccupancyGrid grid;
    std::vector<int16_t> owner;  // -1 root, -2 empty, else object index

    int16_t owner_at(int i, int j, int k) const {
        return owner[(static_cast<size_t>(i) * grid.ny + j) * grid.nz + k];
    }
};

OracleScene oracle_scene(const SceneState& scene, double res, double needed_top) {
    const Bounds2D& b = scene.bounds;
    double top = std::max(b.top_z, needed_top);
    for (const PlacedObject& o : scene.objects) top = std::max(top, o.world_aabb().max.z);

    OracleScene occ;
    const Vec3 origin{b.min_x, b.min_y, b.top_z - 2.0 * res};
    const int nx = std::max(1, static_cast<int>(std::ceil(b.width_x() / res - 1e-9)));
    const int ny = std::max(1, static_cast<int>(std::ceil(b.width_y() / res - 1e-9)));
    const int nz = 2 + std::max(1, static_cast<int>(std::ceil((top - b.top_z) / res - 1e-9))) + 1;
    occ.grid = OccupancyGrid::make(origin, res, nx, ny, nz);
    occ.owner.assign(static_cast<size_t>(nx) * ny * nz, -2);

    auto stamp = [&](int i, int j, int k, int16_t label) {
        occ.grid.set(i, j, k);
        int16_t& o = occ.owner[(static_cast<size_t>(i) * ny + j) * nz + k];
        if (o == -2) o = label;
    };
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < 2; ++k) stamp(i, j, k, -1);

    for (size_t oi = 0; oi < scene.objects.size(); ++oi) {
        const PlacedObject& obj = scene.objects[oi];
        const double eff = obj.asset->effective_rotation(obj.pose.yaw);
        for (int i = 0; i < nx; ++i) {
            for (int j = 0; j < ny; ++j) {
                const Vec3 c = occ.grid.voxel_center(i, j, 0);
                const Vec2 local = rotate({c.x - obj.pose.position.x, c.y - obj.pose.position.y}, -eff);
                for (const auto& [lo, hi] : shape_z_intervals(obj.asset->shape, local.x, local.y)) {
                    const double wlo = obj.pose.position.z + lo;
                    const double whi = obj.pose.position.z + hi;
                    const int k0 =
                        std::max(0, static_cast<int>(std::ceil((wlo - origin.z) / res - 0.5 - 1e-12)));
                    const int k1 = std::min(
                        nz - 1, static_cast<int>(std::floor((whi - origin.z) / res - 0.5 - 1e-12)));
                    for (int k = k0; k <= k1; ++k) stamp(i, j, k, static_cast<int16_t>(oi));
                }
            }
        }
    }
    return occ;
}

// Object lattice snapped onto the scene lattice, plus the world pose of the
// zero offset.
struct SnappedObject {
    OccupancyGrid grid;
    Vec3 base;
};

SnappedObject snap_object(const OracleScene& occ, const PlacedObject& proto, double res) {
    const OccupancyGrid probe = voxelize(*proto.asset, Pose{{0, 0, 0}, proto.pose.yaw}, res);
    const Vec3 d = probe.origin - occ.grid.origin;
    const Vec3 snap{res * std::round(d.x / res) - d.x, res * std::round(d.y / res) - d.y,
                    res * std::round(d.z / res) - d.z};
    SnappedObject out;
    out.grid = voxelize(*proto.asset, Pose{snap, proto.pose.yaw}, res);
    out.grid.origin = occ.grid.origin;
    out.base = snap - Vec3{res * std::round(d.x / res), res * std::round(d.y / res),
                           res * std::round(d.z / res)};
    return out;
}

std::vector<GridIndex> brute_offsets(const OccupancyGrid& scene, const OccupancyGrid& object) {
    std::vector<GridIndex> out;
    for (int tx = 0; tx + object.nx <= scene.nx; ++tx) {
        for (int ty = 0; ty + object.ny <= scene.ny; ++ty) {
            for (int tz = 0; tz + object.nz <= scene.nz; ++tz) {
                bool hit = false;
                for (int i = 0; i < object.nx && !hit; ++i)
                    for (int j = 0; j < object.ny && !hit; ++j)
                        for (int k = 0; k < object.nz && !hit; ++k)
                            if (object.occupied(i, j, k) && scene.occupied(i + tx, j + ty, k + tz))
                                hit = true;
                if (!hit) out.push_back({tx, ty, tz});
            }
        }
    }
    return out;
}

// Columns holding an occupied voxel within k_bottom layers of the object's
// lowest occupied layer.
SurfaceMask brute_bottom(const OccupancyGrid& object, int k_bottom) {
    SurfaceMask mask;
    mask.nx = object.nx;
    mask.ny = object.ny;
    mask.origin_xy = {object.origin.x, object.origin.y};
    mask.resolution = object.resolution;
    mask.cells.assign(static_cast<size_t>(object.nx) * object.ny, 0);

    int k_min = -1;
    for (int i = 0; i < object.nx; ++i)
        for (int j = 0; j < object.ny; ++j)
            for (int k = 0; k < object.nz; ++k)
                if (object.occupied(i, j, k) && (k_min < 0 || k < k_min)) k_min = k;
    if (k_min < 0) return mask;

    for (int i = 0; i < object.nx; ++i)
        for (int j = 0; j < object.ny; ++j)
            for (int k = k_min; k < std::min(object.nz, k_min + k_bottom); ++k)
                if (object.occupied(i, j, k)) {
                    mask.set(i, j);
                    break;
                }
    return mask;
}

SurfaceMask brute_contact(const OccupancyGrid& object, GridIndex t, const OccupancyGrid& scene,
                          int k_bottom, int k_search) {
    const SurfaceMask bottom = brute_bottom(object, k_bottom);
    SurfaceMask mask;
    mask.nx = object.nx;
    mask.ny = object.ny;
    mask.origin_xy = {scene.origin.x + scene.resolution * t.x, scene.origin.y + scene.resolution * t.y};
    mask.resolution = scene.resolution;
    mask.cells.assign(static_cast<size_t>(object.nx) * object.ny, 0);

    for (int i = 0; i < object.nx; ++i) {
        for (int j = 0; j < object.ny; ++j) {
            if (!bottom.at(i, j)) continue;
            const int si = i + t.x;
            const int sj = j + t.y;
            if (si < 0 || si >= scene.nx || sj < 0 || sj >= scene.ny) continue;
            const int low = object.column_lowest(i, j) + t.z;
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

bool mask_equal(const SurfaceMask& a, const SurfaceMask& b) {
    return a.nx == b.nx && a.ny == b.ny && a.resolution == b.resolution &&
           a.origin_xy.x == b.origin_xy.x && a.origin_xy.y == b.origin_xy.y && a.cells == b.cells;
}

struct BottomStats {
    size_t cells = 0;
    size_t perimeter = 0;  // cells with a 4-neighbor outside the mask
};

BottomStats bottom_stats(const SurfaceMask& bottom) {
    BottomStats stats;
    for (int i = 0; i < bottom.nx; ++i) {
        for (int j = 0; j < bottom.ny; ++j) {
            if (!bottom.at(i, j)) continue;
            ++stats.cells;
            const bool edge = i == 0 || j == 0 || i == bottom.nx - 1 || j == bottom.ny - 1 ||
                              !bottom.at(i - 1, j) || !bottom.at(i + 1, j) || !bottom.at(i, j - 1) ||
                              !bottom.at(i, j + 1);
            if (edge) ++stats.perimeter;
        }
    }
    return stats;
}

std::vector<PlacementCandidate> brute_candidates(const SceneState& scene, const OracleScene& occ,
                                                 const SnappedObject& snapped, const PlacedObject& proto,
                                                 const PlacementRequest& request,
                                                 const SolveConfig& config) {
    const bool on_target = request.relation == Relation::PlaceOn;
    const double res = config.resolution;
    const OccupancyGrid& og = snapped.grid;

    int target_index = -1;
    Vec2 target_center{0, 0};
    double target_wx = 1.0, target_wy = 1.0;
    if (on_target) {
        target_index = scene.index_of(request.target);
        const Aabb2 tb = scene.objects[target_index].world_aabb().xy();
        target_center = tb.center();
        target_wx = std::max(tb.width_x(), 1e-9);
        target_wy = std::max(tb.width_y(), 1e-9);
    }

    const SurfaceMask bottom = brute_bottom(og, config.k_bottom);
    std::vector<PlacementCandidate> out;
    if (bottom.count() == 0) return out;

    const Aabb2 rb = proto.asset->rotated_aabb(proto.pose.yaw).xy();
    const double half_extent = std::max(0.5 * std::max(rb.width_x(), rb.width_y()), 1e-9);
    const Vec3 local_com = shape_centroid(proto.asset->shape) + proto.com_shift;
    const Vec2 com_rot = rotate(local_com.xy(), proto.asset->effective_rotation(proto.pose.yaw));
    const Vec2 com_tilt{proto.tilt.y * local_com.z, -proto.tilt.x * local_com.z};

    for (const GridIndex& t : brute_offsets(occ.grid, og)) {
        const SurfaceMask contact = brute_contact(og, t, occ.grid, config.k_bottom, config.k_search);
        if (contact.count() == 0) continue;

        bool owners_ok = true;
        double prob_sum = 0.0;
        for (int i = 0; i < og.nx && owners_ok; ++i) {
            for (int j = 0; j < og.ny && owners_ok; ++j) {
                if (!contact.at(i, j)) continue;
                const int low = og.column_lowest(i, j) + t.z;
                int16_t owner = -2;
                for (int dk = 1; dk <= config.k_search; ++dk) {
                    const int k = low - dk;
                    if (k < 0 || k >= occ.grid.nz) continue;
                    if (occ.grid.occupied(i + t.x, j + t.y, k)) {
                        owner = occ.owner_at(i + t.x, j + t.y, k);
                        break;
                    }
                }
                if (on_target) {
                    owners_ok = owner == static_cast<int16_t>(target_index);
                } else {
                    const double p =
                        owner == -1 ? 1.0 : scene.objects[owner].asset->supporting_probability;
                    owners_ok = p > 0.0;
                    prob_sum += p;
                }
            }
        }
        if (!owners_ok) continue;

        PlacementCandidate cand;
        cand.offset = t;
        cand.pose.position = snapped.base + Vec3{res * t.x, res * t.y, res * t.z};
        cand.pose.yaw = proto.pose.yaw;
        const Vec2 com_xy = Vec2{cand.pose.position.x, cand.pose.position.y} + com_rot + com_tilt;
        if (!support_valid(contact, com_xy)) continue;

        cand.support_ratio = static_cast<double>(contact.count()) / static_cast<double>(bottom.count());
        cand.supporter_probability = on_target ? 1.0 : prob_sum / static_cast<double>(contact.count());

        double score = 0.0;
        if (on_target) {
            const Vec2 center{cand.pose.position.x + (rb.min_x + rb.max_x) * 0.5,
                              cand.pose.position.y + (rb.min_y + rb.max_y) * 0.5};
            score -= std::abs((center.x - target_center.x) - request.x_offset.value_or(0.0)) / target_wx;
            score -= std::abs((center.y - target_center.y) - request.y_offset.value_or(0.0)) / target_wy;
        }
        if (request.overlap) score -= std::abs(cand.support_ratio - *request.overlap);
        if (request.want_unstable) {
            std::vector<Vec2> hull = hull_or_degenerate(contact.centers());
            double edge = 0.0;
            if (hull.size() == 1) {
                edge = (com_xy - hull.front()).norm();
            } else if (!hull.empty()) {
                edge = std::numeric_limits<double>::infinity();
                for (size_t i = 0; i < hull.size(); ++i) {
                    const Vec2 a = hull[i], b = hull[(i + 1) % hull.size()];
                    const Vec2 ab = b - a;
                    const double len2 = ab.dot(ab);
                    const double u = len2 <= 0 ? 0.0 : std::clamp((com_xy - a).dot(ab) / len2, 0.0, 1.0);
                    edge = std::min(edge, (com_xy - (a + ab * u)).norm());
                }
            }
            score -= edge / half_extent;
        }
        if (!on_target) score += cand.supporter_probability;
        cand.score = score;
        out.push_back(std::move(cand));
    }

    std::stable_sort(out.begin(), out.end(), [](const PlacementCandidate& a, const PlacementCandidate& b) {
        return a.score > b.score;
    });
    return out;
}

bool candidates_equal(const std::vector<PlacementCandidate>& got,
                      const std::vector<PlacementCandidate>& want) {
    if (got.size() != want.size()) return false;
    for (size_t i = 0; i < got.size(); ++i) {
        const PlacementCandidate& g = got[i];
        const PlacementCandidate& w = want[i];
        if (!(g.offset == w.offset)) return false;
        if (g.pose.position.x != w.pose.position.x || g.pose.position.y != w.pose.position.y ||
            g.pose.position.z != w.pose.position.z || g.pose.yaw != w.pose.yaw)
            return false;
        if (g.support_ratio != w.support_ratio || g.supporter_probability != w.supporter_probability ||
            g.score != w.score)
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Criterion 1: forward evaluation of all 26 relations on hand-built fixtures.

std::string book_pair(const std::string& statement) {
    return R"([
        ["a", "a hardcover book"], ["b", "a hardcover book"],
        ["b", "PLACE-ON-BASE", "root", {"x": 0, "y": 0}],
        ["a", "PLACE-ON-BASE", "root", {"x": 0.3, "y": 0.3}],
        )" + statement + "]";
}

std::string keyboard_pair(const std::string& statement) {
    return R"([
        ["a", "a mechanical keyboard"], ["b", "a hardcover book"],
        ["b", "PLACE-ON-BASE", "root", {"x": 0, "y": 0}],
        ["a", "PLACE-ON-BASE", "root", {"x": 0.3, "y": 0.3}],
        )" + statement + "]";
}

bool criterion_predicate_semantics(std::string& note) {
    const auto t0 = std::chrono::steady_clock::now();
    Check check;
    std::set<Relation> covered;

    const auto near = [](double a, double b) { return std::abs(a - b) < kPoseTol; };
    const auto check_xy = [&](Relation r, const std::string& text, double x, double y) {
        const Pose& a = eval_program(text, 7).poses.at("a");
        check.expect(near(a.position.x, x) && near(a.position.y, y),
                     std::string(relation_name(r)) + " position");
        covered.insert(r);
    };
    const auto check_yaw = [&](Relation r, const std::string& text, double yaw) {
        const Pose& a = eval_program(text, 7).poses.at("a");
        check.expect(near(a.yaw, yaw), std::string(relation_name(r)) + " yaw");
        covered.insert(r);
    };

    // Directional offsets measure between touching edges; books have half
    // extents 0.1 x 0.075.
    check_xy(Relation::LeftOf, book_pair(R"(["a", "LEFT-OF", "b", {"distance": 0.1}])"), 0.3, 0.25);
    check_xy(Relation::RightOf, book_pair(R"(["a", "RIGHT-OF", "b", {"distance": 0.1}])"), 0.3, -0.25);
    check_xy(Relation::FrontOf, book_pair(R"(["a", "FRONT-OF", "b", {"distance": 0.05}])"), 0.25, 0.3);
    check_xy(Relation::BackOf, book_pair(R"(["a", "BACK-OF", "b", {"distance": 0.05}])"), -0.25, 0.3);
    check_xy(Relation::AlignCenterLR, book_pair(R"(["a", "ALIGN-CENTER-LR", "b", {}])"), 0.3, 0.0);
    check_xy(Relation::AlignCenterFB, book_pair(R"(["a", "ALIGN-CENTER-FB", "b", {}])"), 0.0, 0.3);

    // Edge alignment on a 0.15 x 0.45 keyboard against the book.
    check_xy(Relation::AlignLeft, keyboard_pair(R"(["a", "ALIGN-LEFT", "b", {}])"), 0.3, -0.15);
    check_xy(Relation::AlignRight, keyboard_pair(R"(["a", "ALIGN-RIGHT", "b", {}])"), 0.3, 0.15);
    check_xy(Relation::AlignFront, keyboard_pair(R"(["a", "ALIGN-FRONT", "b", {}])"), 0.025, 0.3);
    check_xy(Relation::AlignBack, keyboard_pair(R"(["a", "ALIGN-BACK", "b", {}])"), -0.025, 0.3);

    {
        const EvaluatedLayout out = eval_program(R"([
            ["a", "a hardcover book"], ["b", "a hardcover book"], ["c", "a hardcover book"],
            ["b", "PLACE-ON-BASE", "root", {"x": 0, "y": 0}],
            ["c", "PLACE-ON-BASE", "root", {"x": 0.2, "y": 0.1}],
            ["a", "SYMMETRY-ALONG", "b", {"C": "c"}]
        ])",
                                                 7);
        const Pose& a = out.poses.at("a");
        check.expect(near(a.position.x, 0.4) && near(a.position.y, 0.2), "SYMMETRY-ALONG mirror");
        covered.insert(Relation::SymmetryAlong);
    }

    // Yaw table: 0 faces +x, angles counterclockwise.
    check_yaw(Relation::FacingTo, book_pair(R"(["a", "FACING-TO", "b", {}])"), 5.0 * kPi / 4.0);
    check_yaw(Relation::FacingFront, book_pair(R"(["a", "FACING-FRONT", "root", {}])"), 0.0);
    check_yaw(Relation::FacingBack, book_pair(R"(["a", "FACING-BACK", "root", {}])"), kPi);
    check_yaw(Relation::FacingLeft, book_pair(R"(["a", "FACING-LEFT", "root", {}])"), kPi / 2.0);
    check_yaw(Relation::FacingRight, book_pair(R"(["a", "FACING-RIGHT", "root", {}])"), 3.0 * kPi / 2.0);
    check_yaw(Relation::FacingOppositeTo, book_pair(R"(["a", "FACING-OPPOSITE-TO", "b", {}])"), kPi);
    check_yaw(Relation::FacingSameAs, R"([
        ["a", "a hardcover book"], ["b", "a hardcover book"],
        ["b", "PLACE-ON-BASE", "root", {"x": 0, "y": 0}],
        ["b", "FACING-LEFT", "root", {}],
        ["a", "PLACE-ON-BASE", "root", {"x": 0.3, "y": 0.3}],
        ["a", "FACING-SAME-AS", "b", {}]
    ])",
              kPi / 2.0);

    {
        const std::string text = book_pair(R"(["a", "RANDOM-ROT", "root", {}])");
        const double yaw = eval_program(text, 42).poses.at("a").yaw;
        check.expect(yaw >= 0.0 && yaw < 2.0 * kPi, "RANDOM-ROT range");
        check.expect(eval_program(text, 42).poses.at("a").yaw == yaw, "RANDOM-ROT determinism");
        check.expect(eval_program(text, 43).poses.at("a").yaw != yaw, "RANDOM-ROT seed sensitivity");
        covered.insert(Relation::RandomRot);
    }

    // The quarter turn wins only when it strictly raises the facing-side
    // overlap (0.15 -> 0.2 for the keyboard beside the book's long edge).
    check_yaw(Relation::OrientByRelativeSide, R"([
        ["a", "a mechanical keyboard"], ["b", "a hardcover book"],
        ["b", "PLACE-ON-BASE", "root", {"x": 0, "y": 0}],
        ["a", "PLACE-ON-BASE", "root", {"x": 0, "y": 0.3}],
        ["a", "ORIENT-BY-RELATIVE-SIDE", "b", {}]
    ])",
              kPi / 2.0);

    {
        const EvaluatedLayout out = eval_program(book_pair(R"(["a", "FACING-FRONT", "root", {}])"), 7);
        const Pose& a = out.poses.at("a");
        check.expect(near(a.position.x, 0.3) && near(a.position.y, 0.3) && near(a.position.z, 0.75),
                     "PLACE-ON-BASE pin");
        covered.insert(Relation::PlaceOnBase);
    }

    {
        const EvaluatedLayout out = eval_program(R"([
            ["a", "a ceramic coffee cup"], ["b", "a hardcover book"],
            ["b", "PLACE-ON-BASE", "root", {"x": 0.1, "y": 0}],
            ["a", "PLACE-ON", "b", {"x_offset": 0.03, "y_offset": -0.02}]
        ])",
                                                 7);
        const Pose& a = out.poses.at("a");
        check.expect(near(a.position.x, 0.13) && near(a.position.y, -0.02) && near(a.position.z, 0.78),
                     "PLACE-ON initializer");
        check.expect(out.physical_order == std::vector<std::string>{"a"}, "PLACE-ON physical order");
        covered.insert(Relation::PlaceOn);
    }

    {
        const EvaluatedLayout out = eval_program(R"([
            ["plate_0", "a round dinner plate"], ["pen_0", "a ballpoint pen"],
            ["b", "a hardcover book"],
            ["b", "PLACE-ON-BASE", "root", {"x": 0, "y": 0}],
            ["plate_0", "PLACE-ON-BASE", "root", {"x": 0.1, "y": 0}],
            ["pen_0", "PLACE-ON-BASE", "root", {"x": 0.1, "y": 0.2}],
            ["group_g", "GROUP", ["plate_0", "pen_0"], {"anchor": "plate_0"}],
            ["group_g", "ALIGN-CENTER-LR", "b", {}]
        ])",
                                                 7);
        // Group bbox spans y in [-0.12, 0.206]; recentering on 0 shifts all
        // members by -0.043.
        check.expect(near(out.poses.at("plate_0").position.y, -0.043) &&
                         near(out.poses.at("pen_0").position.y, 0.157) &&
                         near(out.poses.at("plate_0").position.x, 0.1),
                     "GROUP rigid shift");
        covered.insert(Relation::Group);
    }

    {
        const EvaluatedLayout out = eval_program(R"([
            ["plate_0", "a round dinner plate"], ["pen_0", "a ballpoint pen"],
            ["plate_0", "PLACE-ON-BASE", "root", {"x": 0.1, "y": 0}],
            ["pen_0", "PLACE-ON-BASE", "root", {"x": 0.1, "y": 0.2}],
            ["group_g0", "GROUP", ["plate_0", "pen_0"], {"anchor": "plate_0"}],
            ["group_g1", "COPY-GROUP", "group_g0", {}],
            ["group_g1", "BACK-OF", "group_g0", {"distance": 0.4}],
            ["group_g1", "ALIGN-CENTER-LR", "group_g0", {}],
            ["group_g1", "FACING-OPPOSITE-TO", "group_g0", {}]
        ])",
                                                 7, Bounds2D{-1.0, 1.0, -1.0, 1.0, 0.75});
        const Pose& plate_c = out.poses.at("plate_0-group_g1");
        const Pose& pen_c = out.poses.at("pen_0-group_g1");
        check.expect(near(plate_c.position.x, -0.54) && near(plate_c.position.y, 0.0) &&
                         near(plate_c.yaw, kPi) && near(pen_c.position.y, -0.2),
                     "COPY-GROUP mirrored setting");
        covered.insert(Relation::CopyGroup);
    }

    {
        const EvaluatedLayout out = eval_program(R"([
            ["bin", "a large open storage box"], ["a", "a small wooden cube block"],
            ["loose", "a rubber bouncy ball"],
            ["bin", "PLACE-ON-BASE", "root", {"x": 0.2, "y": 0.1}],
            ["a", "PLACE-IN", "bin", {}],
            ["loose", "PLACE-ANYWHERE", "root", {}]
        ])",
                                                 7);
        const Pose& a = out.poses.at("a");
        check.expect(near(a.position.x, 0.2) && near(a.position.y, 0.1) && near(a.position.z, 0.9),
                     "PLACE-IN initializer");
        const Pose& loose = out.poses.at("loose");
        check.expect(near(loose.position.x, 0.0) && near(loose.position.y, 0.0),
                     "PLACE-ANYWHERE initializer");
        covered.insert(Relation::PlaceIn);
        covered.insert(Relation::PlaceAnywhere);
    }

    const double dt = seconds_since(t0);
    check.expect(static_cast<int>(covered.size()) == kRelationCount, "relation coverage");
    check.expect(dt < kSemanticsBudget, "runtime budget");
    note = std::to_string(covered.size()) + "/26 relations within 1e-9, " + fmt4(dt) + " s";
    if (!check.ok()) note += "; first failure: " + check.first;
    return check.ok();
}

// ---------------------------------------------------------------------------
// Criterion 2: grid-search equivalence on randomized scenes.

bool criterion_grid_equivalence(std::string& note) {
    const auto t0 = std::chrono::steady_clock::now();
    Check check;
    Rng rng(20260815);
    const std::vector<std::string> scene_assets{"book_a", "cube_small", "ball_a", "pen_a"};
    const std::vector<std::string> proto_assets{"cube_small", "cup_a", "pen_a"};
    int grids_checked = 0;

    for (int round = 0; round < kEquivalenceScenes; ++round) {
        SceneState scene;
        const double wx = rng.uniform(0.16, 0.235);
        const double wy = rng.uniform(0.16, 0.235);
        scene.bounds = {-wx / 2.0, wx / 2.0, -wy / 2.0, wy / 2.0, 0.75};

        const int count = static_cast<int>(rng.below(3));
        for (int i = 0; i < count; ++i) {
            PlacedObject obj = test::make_object(
                "obj" + std::to_string(i), scene_assets[rng.below(scene_assets.size())],
                {rng.uniform(-0.06, 0.06), rng.uniform(-0.06, 0.06), 0.0}, rng.uniform(0.0, 2.0 * kPi));
            obj.pose.position.z = 0.75 - obj.asset->local_aabb().min.z;
            scene.objects.push_back(obj);
        }

        PlacedObject proto = test::make_object("cand", proto_assets[rng.below(proto_assets.size())],
                                               {0, 0, 0}, rng.uniform(0.0, 2.0 * kPi));

        SolveConfig config;
        config.k_bottom = 1 + static_cast<int>(rng.below(2));
        config.k_search = 1 + static_cast<int>(rng.below(2));

        PlacementRequest request;
        if (count > 0 && rng.below(2) == 0) {
            request.relation = Relation::PlaceOn;
            request.target = scene.objects[rng.below(scene.objects.size())].id;
            if (rng.below(2) == 0) request.x_offset = rng.uniform(-0.04, 0.04);
            if (rng.below(2) == 0) request.overlap = rng.uniform(0.3, 1.0);
            request.want_unstable = rng.below(4) == 0;
        } else {
            request.relation = Relation::PlaceAnywhere;
        }

        double scene_top = scene.bounds.top_z;
        for (const PlacedObject& o : scene.objects) scene_top = std::max(scene_top, o.world_aabb().max.z);
        const OracleScene occ = oracle_scene(scene, config.resolution,
                                             scene_top + proto.asset->height() + 2.0 * config.resolution);
        check.expect(occ.grid.nx <= 24 && occ.grid.ny <= 24 && occ.grid.nz <= 24, "scene fits 24^3");

        const SnappedObject snapped = snap_object(occ, proto, config.resolution);

        const std::vector<GridIndex> lib_offsets = feasible_offsets(occ.grid, snapped.grid);
        const std::vector<GridIndex> ref_offsets = brute_offsets(occ.grid, snapped.grid);
        check.expect(lib_offsets == ref_offsets, "feasible_offsets mismatch");

        const size_t stride = std::max<size_t>(1, lib_offsets.size() / 25);
        for (size_t i = 0; i < lib_offsets.size(); i += stride) {
            const GridIndex t = lib_offsets[i];
            const SurfaceMask lib =
                contact_surface(snapped.grid, t, occ.grid, config.k_bottom, config.k_search);
            const SurfaceMask ref =
                brute_contact(snapped.grid, t, occ.grid, config.k_bottom, config.k_search);
            check.expect(mask_equal(lib, ref), "contact_surface mismatch");
        }

        const std::vector<PlacementCandidate> lib_cands = place_candidates(scene, proto, request, config);
        const std::vector<PlacementCandidate> ref_cands =
            brute_candidates(scene, occ, snapped, proto, request, config);
        check.expect(candidates_equal(lib_cands, ref_cands), "candidate set mismatch");
        ++grids_checked;
    }

    const double dt = seconds_since(t0);
    check.expect(dt < kEquivalenceBudget, "runtime budget");
    note = std::to_string(grids_checked) + " scenes bit-for-bit, " + fmt4(dt) + " s";
    if (!check.ok()) note += "; first failure: " + check.first;
    return check.ok();
}

// ---------------------------------------------------------------------------
// Criterion 3: spatial solve of a crowded five-object fixture.

const char* kCrowdedProgram = R"([
    ["b0", "a hardcover book"], ["b1", "a hardcover book"], ["b2", "a hardcover book"],
    ["b3", "a hardcover book"], ["b4", "a hardcover book"],
    ["b0", "PLACE-ON-BASE", "root", {"x": 0.0, "y": 0.0}],
    ["b1", "PLACE-ON-BASE", "root", {"x": 0.05, "y": 0.0}],
    ["b2", "PLACE-ON-BASE", "root", {"x": -0.05, "y": 0.02}],
    ["b3", "PLACE-ON-BASE", "root", {"x": 0.02, "y": -0.04}],
    ["b4", "PLACE-ON-BASE", "root", {"x": 0.0, "y": 0.05}]
])";

class StepRecorder : public StepObserver {
  public:
    std::vector<double> penalties;
    int max_iteration = -1;

    void on_step(int iteration, int, double penalty) override {
        penalties.push_back(penalty);
        max_iteration = std::max(max_iteration, iteration);
    }
};

bool criterion_spatial_budget(std::string& note) {
    const auto t0 = std::chrono::steady_clock::now();
    Check check;

    StepRecorder recorder;
    const SpatialResult result = optimize(parse_program(kCrowdedProgram), test::fixture_catalog(),
                                          test::table_bounds(), 17, SolveConfig{}, &recorder);
    const double dt = seconds_since(t0);

    check.expect(std::holds_alternative<SolvedLayout>(result), "solver failed");
    double penalty = std::numeric_limits<double>::infinity();
    if (std::holds_alternative<SolvedLayout>(result)) penalty = std::get<SolvedLayout>(result).penalty;
    check.expect(penalty < kPenaltyTarget, "penalty above 1e-4");
    check.expect(recorder.max_iteration < kDescentIterations, "iteration cap exceeded");
    check.expect(dt < kSpatialBudget, "runtime budget");
    note = "penalty " + fmt4(penalty) + " in " + std::to_string(recorder.max_iteration + 1) +
           " iterations, " + fmt4(dt) + " s";
    if (!check.ok()) note += "; first failure: " + check.first;
    return check.ok();
}

// ---------------------------------------------------------------------------
// Criterion 4: descent penalties never increase across random programs.

std::string random_crowd_program(Rng& rng) {
    const int n = 4 + static_cast<int>(rng.below(3));
    std::string text = "[";
    for (int i = 0; i < n; ++i)
        text += "[\"b" + std::to_string(i) + "\", \"a hardcover book\"],";
    for (int i = 0; i < n; ++i) {
        text += "[\"b" + std::to_string(i) + "\", \"PLACE-ON-BASE\", \"root\", {\"x\": " +
                std::to_string(rng.uniform(-0.08, 0.08)) + ", \"y\": " +
                std::to_string(rng.uniform(-0.08, 0.08)) + "}]";
        text += i + 1 < n ? "," : "";
    }
    static const char* kDirections[] = {"LEFT-OF", "RIGHT-OF", "FRONT-OF", "BACK-OF"};
    for (int i = 1; i < n; ++i) {
        if (rng.below(2) == 0) continue;
        text += ",[\"b" + std::to_string(i) + "\", \"" + kDirections[rng.below(4)] + "\", \"b" +
                std::to_string(i - 1) + "\", {\"distance\": " + std::to_string(rng.uniform(0.0, 0.05)) +
                "}]";
    }
    text += "]";
    return text;
}

bool criterion_penalty_monotonic(std::string& note) {
    Check check;
    Rng rng(777);
    int total_steps = 0;
    int increases = 0;
    int programs = 0;

    while (total_steps < kMonotoneSteps && programs < 200) {
        const PredicateProgram program = parse_program(random_crowd_program(rng));
        StepRecorder recorder;
        optimize(program, test::fixture_catalog(), test::table_bounds(), 1000 + programs, SolveConfig{},
                 &recorder);
        for (size_t i = 1; i < recorder.penalties.size(); ++i)
            if (recorder.penalties[i] > recorder.penalties[i - 1]) ++increases;
        total_steps += static_cast<int>(recorder.penalties.size());
        ++programs;
    }

    check.expect(total_steps >= kMonotoneSteps, "too few recorded steps");
    check.expect(increases == 0, "penalty increased");
    note = std::to_string(total_steps) + " steps over " + std::to_string(programs) + " programs, " +
           std::to_string(increases) + " increases";
    if (!check.ok()) note += "; first failure: " + check.first;
    return check.ok();
}

// ---------------------------------------------------------------------------
// Criterion 5: solver outputs re-settle in place.

bool criterion_resettle(std::string& note) {
    Check check;
    struct Job {
        const char* text;
        Bounds2D bounds;
    };
    const Bounds2D table = test::table_bounds();
    const std::vector<Job> jobs{
        {R"([
            ["book_0", "a hardcover book"], ["cup_0", "a ceramic coffee cup"],
            ["book_0", "PLACE-ON-BASE", "root", {"x": 0.1, "y": 0.0}],
            ["book_0", "FACING-FRONT", "root", {}],
            ["cup_0", "PLACE-ON", "book_0", {}]
        ])",
         table},
        {R"([
            ["b0", "a hardcover book"], ["b1", "a hardcover book"],
            ["plate_0", "a round dinner plate"],
            ["b0", "PLACE-ON-BASE", "root", {"x": -0.2, "y": 0.1}],
            ["b0", "FACING-FRONT", "root", {}],
            ["b1", "PLACE-ON-BASE", "root", {}],
            ["b1", "LEFT-OF", "b0", {"distance": 0.05}],
            ["b1", "ALIGN-CENTER-FB", "b0", {}],
            ["b1", "FACING-FRONT", "root", {}],
            ["plate_0", "PLACE-ON-BASE", "root", {"x": 0.25, "y": -0.2}],
            ["plate_0", "RANDOM-ROT", "root", {}]
        ])",
         table},
        {R"([
            ["monitor_0", "a desktop monitor screen"], ["kb_0", "a mechanical keyboard"],
            ["monitor_0", "PLACE-ON-BASE", "root", {"x": -0.25, "y": 0.0}],
            ["monitor_0", "FACING-FRONT", "root", {}],
            ["kb_0", "PLACE-ON-BASE", "root", {}],
            ["kb_0", "FRONT-OF", "monitor_0", {"distance": 0.05}],
            ["kb_0", "ALIGN-CENTER-LR", "monitor_0", {}],
            ["kb_0", "FACING-FRONT", "root", {}]
        ])",
         table},
        {R"([
            ["bin_0", "a large open storage box"],
            ["bin_0", "PLACE-ON-BASE", "root", {"x": 0.15, "y": 0.1}],
            ["bin_0", "FACING-FRONT", "root", {}],
            [[["cube", 2]], "PLACE-IN", "bin_0", {}]
        ])",
         table},
        {R"([
            ["cube_0", "a small wooden cube block"], ["cube_1", "a small wooden cube block"],
            ["ball_0", "a rubber bouncy ball"],
            ["cube_0", "PLACE-ANYWHERE", "root", {}],
            ["cube_1", "PLACE-ANYWHERE", "root", {}],
            ["ball_0", "PLACE-ANYWHERE", "root", {}]
        ])",
         table},
        {R"([
            ["plate_0", "a round dinner plate"], ["pen_0", "a ballpoint pen"],
            ["plate_0", "PLACE-ON-BASE", "root", {"x": 0.3, "y": 0}],
            ["plate_0", "FACING-FRONT", "root", {}],
            ["pen_0", "PLACE-ON-BASE", "root", {"x": 0.3, "y": 0.25}],
            ["pen_0", "FACING-FRONT", "root", {}],
            ["group_g0", "GROUP", ["plate_0", "pen_0"], {"anchor": "plate_0"}],
            ["group_g1", "COPY-GROUP", "group_g0", {}],
            ["group_g1", "BACK-OF", "group_g0", {"distance": 0.3}],
            ["group_g1", "ALIGN-CENTER-LR", "group_g0", {}],
            ["group_g1", "FACING-OPPOSITE-TO", "group_g0", {}]
        ])",
         Bounds2D{-1.0, 1.0, -1.0, 1.0, 0.75}},
    };

    const SolveConfig config;
    int solved = 0;
    double worst = 0.0;
    for (size_t i = 0; i < jobs.size(); ++i) {
        QuasiStaticBackend backend(config.resolution);
        const SolveOutcome outcome = solve_program(parse_program(jobs[i].text), test::fixture_catalog(),
                                                   jobs[i].bounds, 33 + i, config, backend);
        check.expect(outcome.success, "program " + std::to_string(i) + " failed to solve");
        if (!outcome.success) continue;
        ++solved;

        SceneState check_scene = outcome.scene;
        QuasiStaticBackend fresh(config.resolution);
        const double moved = settle_distance(fresh, check_scene, 400);
        worst = std::max(worst, moved);
        check.expect(moved <= 2.0 * config.resolution,
                     "program " + std::to_string(i) + " drifted " + fmt4(moved) + " m");
    }

    note = std::to_string(solved) + "/" + std::to_string(jobs.size()) +
           " scenes re-settle, worst drift " + fmt4(worst) + " m (cap " +
           fmt4(2.0 * config.resolution) + ")";
    if (!check.ok()) note += "; first failure: " + check.first;
    return check.ok();
}

// ---------------------------------------------------------------------------
// Criterion 6: estimator equals the direct kernel ratio.

double direct_ratio(const PerturbationVector& query, const StabilityDataset& data,
                    const PerturbationSpec& spec) {
    long double num = 0.0L, den = 0.0L;
    for (const StabilitySample& s : data.samples) {
        long double e = 0.0L;
        for (int d = 0; d < kPerturbationDim; ++d) {
            const long double diff = (static_cast<long double>(s.x.v[d]) - query.v[d]) / spec.theta[d];
            e += diff * diff;
        }
        const long double w = expl(-0.5L * e);
        num += w * s.label;
        den += w;
    }
    return static_cast<double>(num / den);
}

bool criterion_estimator_exact(std::string& note) {
    Check check;
    Rng rng(606);
    double worst_rel = 0.0;

    for (int round = 0; round < 50; ++round) {
        PerturbationSpec spec;
        for (int d = 0; d < kPerturbationDim; ++d) spec.theta[d] = rng.uniform(0.01, 2.0);
        StabilityDataset data;
        const int n = 5 + static_cast<int>(rng.below(36));
        spec.samples = n;
        for (int i = 0; i < n; ++i) {
            StabilitySample s;
            for (int d = 0; d < kPerturbationDim; ++d)
                s.x.v[d] = rng.uniform(-2.0 * spec.theta[d], 2.0 * spec.theta[d]);
            s.label = static_cast<int>(rng.below(2));
            data.samples.push_back(s);
        }
        PerturbationVector query;
        if (round % 2 == 1) query = data.samples[rng.below(data.samples.size())].x;

        const double got = estimate_p_fail(query, data, spec).p_fail;
        const double want = direct_ratio(query, data, spec);
        const double rel = want == 0.0 ? (got == 0.0 ? 0.0 : 1.0) : std::abs(got - want) / std::abs(want);
        worst_rel = std::max(worst_rel, rel);
        check.expect(rel <= kEstimatorRelTol, "estimator off at round " + std::to_string(round));
    }

    {
        // Two samples at mirrored offsets with opposite labels weigh equally.
        PerturbationSpec spec;
        spec.theta.fill(0.5);
        spec.samples = 2;
        StabilityDataset data;
        StabilitySample a, b;
        a.x.v[3] = 0.7;
        a.label = 1;
        b.x.v[3] = -0.7;
        b.label = 0;
        data.samples = {a, b};
        check.expect(estimate_p_fail({}, data, spec).p_fail == 0.5, "equidistant pair not 0.5");
    }
    {
        PerturbationSpec spec;
        spec.theta.fill(0.3);
        spec.samples = 20;
        StabilityDataset data;
        Rng stable_rng(607);
        for (int i = 0; i < 20; ++i) {
            StabilitySample s;
            for (int d = 0; d < kPerturbationDim; ++d) s.x.v[d] = stable_rng.uniform(-0.3, 0.3);
            s.label = 0;
            data.samples.push_back(s);
        }
        const StabilityEstimate est = estimate_p_fail({}, data, spec);
        check.expect(est.p_fail == 0.0 && est.effective_weight > 0.0, "all-stable not exactly 0");
    }

    note = "50 datasets, worst relative error " + (worst_rel == 0.0 ? std::string("0") : fmt4(worst_rel * 1e12) + "e-12");
    if (!check.ok()) note += "; first failure: " + check.first;
    return check.ok();
}

// ---------------------------------------------------------------------------
// Criterion 7: the instability optimizer climbs without losing stability.

bool criterion_instability_climb(std::string& note) {
    const auto t0 = std::chrono::steady_clock::now();
    Check check;

    SceneState scene;
    scene.bounds = test::table_bounds();
    scene.objects.push_back(test::on_table("book_0", "book_a", 0.1, 0.0));
    PlacedObject cup = test::make_object("cup_0", "cup_a", {0.185, 0.0, 0.0});
    cup.pose.position.z = 0.78 - cup.asset->local_aabb().min.z;
    cup.mass = 0.11;
    scene.objects.push_back(cup);

    PerturbationSpec spec = PerturbationSpec::defaults_for(scene.objects[1]);
    spec.samples = 50;

    int wins = 0;
    for (int run = 0; run < kClimbRuns; ++run) {
        const uint64_t seed = 7000 + run;
        QuasiStaticBackend backend(0.01);

        double p_init = 0.0;
        try {
            const StabilityDataset data = sample_dataset(scene, "cup_0", spec, backend, seed ^ 0x5a5a);
            p_init = estimate_p_fail({}, data, spec).p_fail;
        } catch (const DegenerateWeights&) {
        }

        const InstabilityResult result = optimize_instability(scene, "cup_0", spec, backend, 5, seed);
        bool stable = false;
        if (!result.no_stable_sample) {
            SceneState confirm = result.scene;
            QuasiStaticBackend fresh(0.01);
            stable = !fresh.settle(confirm, 400).any_fell();
        }
        if (stable && result.p_fail >= p_init) ++wins;
    }

    const double dt = seconds_since(t0);
    check.expect(wins >= kClimbWins, "too few climbing runs");
    check.expect(dt < kClimbBudget, "runtime budget");
    note = std::to_string(wins) + "/" + std::to_string(kClimbRuns) + " runs stable with p_fail >= start, " +
           fmt4(dt) + " s";
    if (!check.ok()) note += "; first failure: " + check.first;
    return check.ok();
}

// ---------------------------------------------------------------------------
// Criterion 8: support-ratio targeting lands within one voxel ring of the
// closest feasible ratio.

bool criterion_support_ratio(std::string& note) {
    Check check;
    SceneState scene;
    scene.bounds = test::table_bounds();
    scene.objects.push_back(test::on_table("base_0", "book_a", 0.0, 0.0));

    const SolveConfig config;
    std::string achieved_list;

    const double targets[] = {0.4, 0.7, 1.0};
    for (int ti = 0; ti < 3; ++ti) {
        const double t = targets[ti];
        PlacedObject proto = test::make_object("top_0", "book_a", {0, 0, 0});
        proto.mass = 0.3;

        PlacementRequest request;
        request.relation = Relation::PlaceOn;
        request.target = "base_0";
        request.overlap = t;

        double scene_top = scene.bounds.top_z;
        for (const PlacedObject& o : scene.objects) scene_top = std::max(scene_top, o.world_aabb().max.z);
        const OracleScene occ = oracle_scene(scene, config.resolution,
                                             scene_top + proto.asset->height() + 2.0 * config.resolution);
        const SnappedObject snapped = snap_object(occ, proto, config.resolution);
        const std::vector<PlacementCandidate> all =
            brute_candidates(scene, occ, snapped, proto, request, config);
        check.expect(!all.empty(), "no feasible candidates");
        if (all.empty()) continue;

        double closest = std::numeric_limits<double>::infinity();
        for (const PlacementCandidate& c : all)
            if (std::abs(c.support_ratio - t) < std::abs(closest - t)) closest = c.support_ratio;

        const BottomStats bottom = bottom_stats(brute_bottom(snapped.grid, config.k_bottom));
        const double ring =
            bottom.cells == 0 ? 0.0
                              : static_cast<double>(bottom.perimeter) / static_cast<double>(bottom.cells);

        SceneState work = scene;
        QuasiStaticBackend backend(config.resolution);
        double achieved = -1.0;
        try {
            achieved = solve_place_on(work, proto, request, config, backend, 90 + ti).support_ratio;
        } catch (const PlacementError&) {
        }
        check.expect(achieved >= 0.0, "placement failed at target " + fmt4(t));
        if (achieved < 0.0) continue;

        check.expect(std::abs(achieved - t) <= std::abs(closest - t) + ring + 1e-12,
                     "ratio " + fmt4(achieved) + " misses target " + fmt4(t) + " (closest feasible " +
                         fmt4(closest) + ", ring " + fmt4(ring) + ")");
        achieved_list += (achieved_list.empty() ? "" : ", ") + fmt4(t) + "->" + fmt4(achieved);
    }

    note = "achieved " + achieved_list;
    if (!check.ok()) note += "; first failure: " + check.first;
    return check.ok();
}

// ---------------------------------------------------------------------------
// Criterion 9: failure reports list every violation exactly once and suggest
// only genuinely empty rectangles.

bool criterion_feedback_exhaustive(std::string& note) {
    Check check;
    Rng rng(5200);
    int verified_regions = 0;
    int verified_violations = 0;

    for (int round = 0; round < kInfeasiblePrograms; ++round) {
        const bool small_table = round % 3 == 0;
        const Bounds2D bounds =
            small_table ? Bounds2D{-0.15, 0.15, -0.15, 0.15, 0.75} : test::table_bounds();
        const int monitors = small_table ? 1 + static_cast<int>(rng.below(2))
                                         : 2 + static_cast<int>(rng.below(2));

        std::string text = "[[\"ref\", \"a hardcover book\"],";
        for (int i = 0; i < monitors; ++i)
            text += "[\"m" + std::to_string(i) + "\", \"a desktop monitor screen\"],";
        text += "[\"ref\", \"PLACE-ON-BASE\", \"root\", {\"x\": " +
                std::to_string(rng.uniform(-0.04, 0.04)) +
                ", \"y\": " + std::to_string(rng.uniform(-0.04, 0.04)) + "}],";
        text += "[\"ref\", \"FACING-FRONT\", \"root\", {}]";
        for (int i = 0; i < monitors; ++i) {
            const std::string id = "\"m" + std::to_string(i) + "\"";
            text += ",[" + id + ", \"PLACE-ON-BASE\", \"root\", {}]";
            text += ",[" + id + ", \"ALIGN-CENTER-LR\", \"ref\", {}]";
            text += ",[" + id + ", \"ALIGN-CENTER-FB\", \"ref\", {}]";
            text += ",[" + id + ", \"FACING-FRONT\", \"root\", {}]";
        }
        text += "]";

        const PredicateProgram program = parse_program(text);
        const AssetBinding binding = bind_assets(program, test::fixture_catalog(), 0.3);
        const SpatialResult result =
            optimize(program, test::fixture_catalog(), bounds, 400 + round, SolveConfig{});
        check.expect(std::holds_alternative<SolverFailure>(result), "program unexpectedly solvable");
        if (!std::holds_alternative<SolverFailure>(result)) continue;
        const SolverFailure& failure = std::get<SolverFailure>(result);
        check.expect(!failure.violations.empty(), "failure carries no violations");

        const FeedbackReport report = diagnose_failure(failure, binding, bounds, 0.01);

        for (const Violation& v : failure.violations) {
            std::string expected;
            if (v.kind == Violation::Kind::Overlap)
                expected = "Objects '" + v.a + "' and '" + v.b + "' overlap by " + fmt4(v.magnitude) +
                           " m^2.";
            else
                expected = "Object '" + v.a + "' extends " + fmt4(v.magnitude) +
                           " m outside the supporting surface.";
            check.expect(count_substr(report.text, expected) == 1,
                         "violation not reported exactly once: " + expected);
            ++verified_violations;
        }
        check.expect(report.issues.size() == failure.violations.size(), "issue count mismatch");

        // Exhaustive emptiness: no placed footprint may overlap any cell of a
        // suggested rectangle.
        const auto placed = layout_footprints(failure.best_layout, binding);
        const double res = 0.01;
        for (const EmptyRegion& region : report.empty_regions) {
            const int i0 = static_cast<int>(std::lround((region.rect.min_x - bounds.min_x) / res));
            const int i1 = static_cast<int>(std::lround((region.rect.max_x - bounds.min_x) / res)) - 1;
            const int j0 = static_cast<int>(std::lround((region.rect.min_y - bounds.min_y) / res));
            const int j1 = static_cast<int>(std::lround((region.rect.max_y - bounds.min_y) / res)) - 1;
            bool clean = true;
            for (int i = i0; i <= i1 && clean; ++i) {
                for (int j = j0; j <= j1 && clean; ++j) {
                    const double x0 = bounds.min_x + res * i;
                    const double y0 = bounds.min_y + res * j;
                    Footprint cell;
                    cell.hull = {{x0, y0}, {x0 + res, y0}, {x0 + res, y0 + res}, {x0, y0 + res}};
                    for (const auto& [id, fp] : placed) {
                        if (fp.empty()) continue;
                        if (overlap_area(fp, cell) > 1e-12) {
                            clean = false;
                            break;
                        }
                    }
                }
            }
            check.expect(clean, "suggested rectangle is not empty");
            ++verified_regions;
        }
    }

    note = std::to_string(kInfeasiblePrograms) + " programs, " + std::to_string(verified_violations) +
           " violations round-tripped, " + std::to_string(verified_regions) + " rectangles verified";
    if (!check.ok()) note += "; first failure: " + check.first;
    return check.ok();
}

// ---------------------------------------------------------------------------
// Criterion 10: scripted two-round sessions replay byte for byte.

const char* kReplayBadProgram = R"([
  ["book_0", "a hardcover book"],
  ["book_0", "HOVER-OVER", "root", {}]
])";

const char* kReplayGoodProgram = R"([
  ["book_0", "a hardcover book"],
  ["cup_0", "a ceramic coffee cup"],
  ["book_0", "PLACE-ON-BASE", "root", {"x": 0.1, "y": 0.0}],
  ["book_0", "FACING-FRONT", "root", {}],
  ["cup_0", "PLACE-ON", "book_0", {}]
])";

struct ScriptedClient : ChatClient {
    std::vector<std::string> responses;
    size_t next = 0;

    std::string complete(const std::vector<Message>&, const AgentConfig&) override {
        if (next >= responses.size()) throw EndpointError("script exhausted");
        return responses[next++];
    }
};

bool criterion_session_replay(std::string& note) {
    Check check;

    const auto run_once = [&](std::string& jsonl, std::string& scene_file, SessionResult& session) {
        ScriptedClient client;
        client.responses = {kReplayBadProgram, kReplayGoodProgram};
        AgentConfig config;
        config.enrichment_rounds = 0;
        session = run_session("a book with a cup of coffee on it", config, test::fixture_catalog(),
                              test::table_bounds(), 4242, &client);
        jsonl = session.transcript.to_jsonl();
        Provenance prov;
        prov.program_hash = fnv1a64(kReplayGoodProgram);
        prov.seed = 4242;
        prov.config = config.solve;
        scene_file = save_scene(session.scene, prov);
    };

    std::string jsonl_a, jsonl_b, scene_a, scene_b;
    SessionResult first, second;
    run_once(jsonl_a, scene_a, first);
    run_once(jsonl_b, scene_b, second);

    check.expect(first.success && first.rounds == 2, "session shape unexpected");
    check.expect(first.transcript.rounds.size() == 2 &&
                     first.transcript.rounds[0].channel == "grammar" &&
                     first.transcript.rounds[1].channel == "success",
                 "round channels unexpected");
    check.expect(jsonl_a == jsonl_b, "transcripts differ between runs");
    check.expect(scene_a == scene_b, "scene files differ between runs");
    check.expect(!jsonl_a.empty() && !scene_a.empty(), "empty replay artifacts");

    note = "2-round transcript (" + std::to_string(jsonl_a.size()) + " bytes) and scene file (" +
           std::to_string(scene_a.size()) + " bytes) byte-identical";
    if (!check.ok()) note += "; first failure: " + check.first;
    return check.ok();
}

// ---------------------------------------------------------------------------
// Criterion 11: repeated PLACE-ANYWHERE approaches greedy packing capacity.

bool criterion_capacity(std::string& note) {
    const auto t0 = std::chrono::steady_clock::now();
    Check check;

    SceneState scene;
    scene.bounds = {-0.5, 0.5, -0.5, 0.5, 0.75};
    const SolveConfig config;

    // Greedy flush packing on the shared lattice: cube cores are 5 columns
    // wide, the voxelized stencil adds one margin column per side, and the
    // stencil must stay inside the 100-column scene grid.
    const double res = config.resolution;
    const int scene_cols = static_cast<int>(std::ceil(scene.bounds.width_x() / res - 1e-9));
    const int core = static_cast<int>(std::ceil(0.05 / res - 1e-9));
    int per_axis = 0;
    for (int c = 1; c + core - 1 <= scene_cols - 2; c += core) ++per_axis;
    const int capacity = per_axis * per_axis;

    QuasiStaticBackend backend(res);
    int placed = 0;
    bool failed = false;
    for (int i = 0; i < capacity; ++i) {
        PlacedObject proto =
            test::make_object("fill_" + std::to_string(i), "cube_small", {0.0, 0.0, 0.775});
        proto.mass = 0.05;
        PlacementRequest request;
        request.relation = Relation::PlaceAnywhere;
        try {
            solve_place_anywhere(scene, proto, request, config, backend, 0xC0FFEE + i);
            ++placed;
        } catch (const PlacementError&) {
            failed = true;
            break;
        }
    }

    const double dt = seconds_since(t0);
    const int required = static_cast<int>(std::ceil(kCapacityFraction * capacity));
    check.expect(capacity > 0, "degenerate capacity");
    check.expect(placed >= required, "placed " + std::to_string(placed) + " of required " +
                                         std::to_string(required));
    check.expect(dt < kCapacityBudget, "runtime budget");
    note = std::to_string(placed) + " cubes placed (greedy capacity " + std::to_string(capacity) +
           ", required " + std::to_string(required) + (failed ? ", stopped on failure" : "") + "), " +
           fmt4(dt) + " s";
    if (!check.ok()) note += "; first failure: " + check.first;
    return check.ok();
}

}  // namespace

int main() {
    struct Criterion {
        const char* title;
        bool (*run)(std::string&);
    };
    const Criterion criteria[] = {
        {"predicate semantics", criterion_predicate_semantics},
        {"grid-search oracle equivalence", criterion_grid_equivalence},
        {"spatial-solver budget", criterion_spatial_budget},
        {"penalty monotonicity", criterion_penalty_monotonic},
        {"physical validity of outputs", criterion_resettle},
        {"stability estimator exactness", criterion_estimator_exact},
        {"instability optimizer contract", criterion_instability_climb},
        {"support-ratio targeting", criterion_support_ratio},
        {"feedback exhaustiveness", criterion_feedback_exhaustive},
        {"agent-loop replay", criterion_session_replay},
        {"capacity sanity", criterion_capacity},
    };

    int failures = 0;
    for (size_t i = 0; i < std::size(criteria); ++i) {
        std::string detail;
        bool ok = false;
        try {
            ok = criteria[i].run(detail);
        } catch (const std::exception& ex) {
            detail = std::string("exception: ") + ex.what();
        }
        if (!ok) ++failures;
        std::printf("criterion %2zu %-34s %s  (%s)\n", i + 1, criteria[i].title,
                    ok ? "PASS" : "FAIL", detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
