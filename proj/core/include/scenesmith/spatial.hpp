#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "scenesmith/predicate.hpp"
#include "scenesmith/scene.hpp"

namespace scenesmith {

class UnsolvedObject : public std::runtime_error {
  public:
    UnsolvedObject(const std::string& id, const std::string& what)
        : std::runtime_error(what), id(id) {}
    std::string id;
};

enum class ParamKind { Distance, Coordinate, Angle };

struct ParamEntry {
    int statement_index = -1;  // wire-array entry index
    std::string key;
    double value = 0.0;
    ParamKind kind = ParamKind::Distance;
};

struct ParamVector {
    std::vector<ParamEntry> entries;

    double get(int statement_index, const std::string& key, double fallback) const;
    void set(int statement_index, const std::string& key, double value);
};

// One entry per optimizable parameter, in statement order: the distance of
// LEFT-OF/RIGHT-OF/FRONT-OF/BACK-OF (defaulting to 0 when unset), the x/y of
// PLACE-ON-BASE when present, and one seeded uniform [0, 2pi) angle per
// RANDOM-ROT.  PLACE-ON offsets/overlap stay with the physical solver.
ParamVector build_params(const PredicateProgram& program, uint64_t seed);

// Object id -> retrieved asset.  Copied-group members share the source
// member's asset.
struct AssetBinding {
    std::map<std::string, const AssetRecord*> by_id;

    const AssetRecord* find(const std::string& id) const;
};

// Resolves every described object through retrieval; ids whose description
// retrieves nothing are absent from the binding and returned in `misses`.
AssetBinding bind_assets(const PredicateProgram& program, const AssetCatalog& catalog, double threshold,
                         std::vector<std::string>* misses = nullptr);

struct EvaluatedLayout {
    // Pose per concrete object (copied-group members included; batch PLACE-IN
    // subjects excluded).  Physically placed objects carry their initializer
    // pose (PLACE-ON center formula; bounds center for PLACE-ANYWHERE and
    // PLACE-IN) which the physical solver later replaces.
    std::map<std::string, Pose> poses;
    // Objects the spatial penalty ranges over, in introduction order.
    std::vector<std::string> spatial_order;
    // Subjects of PLACE-ON / PLACE-IN / PLACE-ANYWHERE.
    std::vector<std::string> physical_order;
};

// Forward evaluation in statement order, applying each relation's bbox / yaw
// update.  Bounding boxes are AABBs of the yaw-rotated footprint and are
// recomputed after every yaw change.  Group statements move members rigidly
// (rotation pivots on the anchor's footprint center).
// Throws UnsolvedObject when a statement reads a coordinate that no earlier
// statement determined.
EvaluatedLayout apply_predicates(const PredicateProgram& program, const ParamVector& params,
                                 const AssetBinding& binding, const Bounds2D& bounds, uint64_t seed);

// Sum of pairwise footprint overlap areas plus per-object boundary
// violations over `ids`.
double layout_penalty(const std::map<std::string, Pose>& poses, const std::vector<std::string>& ids,
                      const AssetBinding& binding, const Bounds2D& bounds);

struct Violation {
    enum class Kind { Overlap, OutOfBounds };
    Kind kind;
    std::string a;
    std::string b;          // empty for OutOfBounds
    double magnitude = 0.0; // m^2 for overlap, meters for out-of-bounds
};

struct SolvedLayout {
    EvaluatedLayout layout;
    ParamVector params;
    double penalty = 0.0;
};

struct SolverFailure {
    EvaluatedLayout best_layout;
    ParamVector params;
    double penalty = 0.0;
    std::vector<Violation> violations;
};

using SpatialResult = std::variant<SolvedLayout, SolverFailure>;

// Called after every accepted coordinate-descent parameter update.
class StepObserver {
  public:
    virtual ~StepObserver() = default;
    virtual void on_step(int iteration, int param_index, double penalty) = 0;
};

// Coordinate descent over the parameter vector: 10 outer iterations, 40
// uniform candidates per parameter within a half-range of one tenth of the
// shortest scene dimension (10 degrees for angles).  The current value
// always competes, so the penalty never increases.  Accepts as soon as the
// penalty drops below config.epsilon.
SpatialResult optimize(const PredicateProgram& program, const AssetCatalog& catalog, const Bounds2D& bounds,
                       uint64_t seed, const SolveConfig& config, StepObserver* observer = nullptr);

constexpr int kDescentIterations = 10;
constexpr int kDescentCandidates = 40;

}  // namespace scenesmith
