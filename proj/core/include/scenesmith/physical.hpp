#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scenesmith/occupancy.hpp"
#include "scenesmith/physics.hpp"
#include "scenesmith/predicate.hpp"
#include "scenesmith/scene.hpp"

namespace scenesmith {

class PlacementError : public std::runtime_error {
  public:
    enum class Kind { NoFeasiblePlacement, PhysicsRejection, TargetMissing, ContainerHasNoCavity };

    PlacementError(Kind kind, const std::string& what, int tried = 0, int total = 0)
        : std::runtime_error(what), kind(kind), candidates_tried(tried), candidates_total(total) {}

    Kind kind;
    int candidates_tried = 0;
    int candidates_total = 0;
};

const char* placement_error_name(PlacementError::Kind kind);

struct PlacementRequest {
    Relation relation = Relation::PlaceOn;  // PlaceOn or PlaceAnywhere
    std::string target;                     // PLACE-ON support object id
    std::optional<double> x_offset;         // requested bbox-center offset from the target, meters
    std::optional<double> y_offset;
    std::optional<double> overlap;          // requested support ratio in [0, 1]
    bool want_unstable = false;             // params stability == "unstable"
};

struct PlacementCandidate {
    GridIndex offset;       // scene-grid offset of the object stencil
    Pose pose;              // continuous pose the offset corresponds to
    double support_ratio = 0.0;
    double supporter_probability = 1.0;  // area-weighted mean over contact cells
    double score = 0.0;
};

// Every in-grid, collision-free offset whose contact surface is non-empty
// and support-valid, scored and sorted by descending score (ties keep the
// lexicographic offset order).  PLACE-ON additionally requires every contact
// cell to rest on the target; PLACE-ANYWHERE instead drops candidates
// touching any zero-supporting-probability owner and folds the mean
// supporter probability into the score.  Score terms, weights 1 each:
//   - |actual - requested| bbox-center offset per axis, normalized by the
//     target extent on that axis; unset offsets request 0 (PLACE-ON only)
//   - |support_ratio - overlap| when overlap is present
//   - COM distance to the contact-hull edge, normalized by the object's
//     footprint half-extent, when an unstable placement is requested
//   + mean supporter probability (PLACE-ANYWHERE only)
std::vector<PlacementCandidate> place_candidates(const SceneState& scene, const PlacedObject& proto,
                                                 const PlacementRequest& request, const SolveConfig& config);

struct PlacementOutcome {
    Pose pose;               // settled pose, also written into the scene
    double support_ratio = 0.0;
    int candidates_total = 0;
    int candidates_tried = 0;
};

// Appends proto to the scene at the best candidate that survives physics:
// candidates are tried in score order (capped at config.max_physics_trials)
// and accepted when the settled object moved at most displacement_delta(),
// nothing fell, and no existing object moved more than displacement_delta().
// The scene keeps the settled poses.  Throws PlacementError and leaves the
// scene untouched when no candidate exists or all tried candidates fail.
PlacementOutcome solve_place_on(SceneState& scene, const PlacedObject& proto,
                                const PlacementRequest& request, const SolveConfig& config,
                                SimulationBackend& backend, uint64_t seed);

// Same acceptance as solve_place_on, but the first candidate tried is drawn
// seeded-uniform from the top score decile (the rest of the decile follows
// in shuffled order, then the remainder by score).
PlacementOutcome solve_place_anywhere(SceneState& scene, const PlacedObject& proto,
                                      const PlacementRequest& request, const SolveConfig& config,
                                      SimulationBackend& backend, uint64_t seed);

struct PlaceInItem {
    std::string id;
    std::string category;
    Pose pose;
};

struct PlaceInResult {
    std::vector<PlaceInItem> placed;
    std::vector<std::string> failed;  // ids that never settled inside the container

    bool complete() const { return failed.empty(); }
};

// Drops batch objects one at a time from seeded x-y positions over the
// container cavity (interior columns with a floor below the rim), keeping an
// object when it settles with its footprint AABB inside the container's and
// nothing else is disturbed; each object gets config.place_in_retries
// attempts before being reported in `failed`.  Batch ids are {category}_{k}
// with k skipping ids already present in the scene.  Throws PlacementError
// (TargetMissing / ContainerHasNoCavity) before any placement is attempted.
PlaceInResult solve_place_in(SceneState& scene, const std::string& container_id,
                             const std::vector<BatchItem>& batch, const AssetCatalog& catalog,
                             const SolveConfig& config, SimulationBackend& backend, uint64_t seed);

// PLACE-IN for a single already-bound object: same seeded cavity drops and
// acceptance as the batch form, config.place_in_retries attempts, throws
// PlacementError when none settles inside.  proto keeps its physical sample;
// position and yaw are drawn per attempt.
PlacementOutcome solve_place_in_single(SceneState& scene, const PlacedObject& proto,
                                       const std::string& container_id, const SolveConfig& config,
                                       SimulationBackend& backend, uint64_t seed);

}  // namespace scenesmith
