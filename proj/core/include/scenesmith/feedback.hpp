#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scenesmith/physical.hpp"
#include "scenesmith/predicate.hpp"
#include "scenesmith/scene.hpp"
#include "scenesmith/spatial.hpp"
#include "scenesmith/stability.hpp"

namespace scenesmith {

enum class FeedbackChannel { Grammar, Failure, Success };

const char* feedback_channel_name(FeedbackChannel channel);

struct FeedbackIssue {
    std::string kind;          // Penetration, OutOfBounds, StackInfeasible, Unsolved, grammar kinds
    int statement_index = -1;  // wire entry index, -1 for program-level issues
    std::string subject;       // object or group the issue names
    std::string other;         // second object for pairwise issues
    double magnitude = 0.0;    // m^2 for penetrations, meters for out-of-bounds
    std::string detail;        // full sentence; object ids appear in single quotes
};

struct EmptyRegion {
    Aabb2 rect;
    double area = 0.0;
    std::string nearest_object;  // empty when nothing is placed
    std::string direction;       // front | back | left | right, relative to nearest_object
};

struct SceneMetrics {
    double stability_score = 1.0;  // mean over objects of (1 - p_fail); 1.0 when empty
    double surface_coverage = 0.0; // union of footprint areas / table area
    double compactness = 1.0;      // union area / area of the union's convex hull
    int object_count = 0;
    std::optional<double> external_vqa;  // only when an external scorer responded
    std::string vqa_error;               // non-fatal note when the scorer failed
};

// Exactly one channel is populated: grammar and failure reports carry issues
// (failure also carries empty regions), success reports carry metrics and
// empty regions.  `text` is the LLM-facing rendering and is never empty.
struct FeedbackReport {
    FeedbackChannel channel = FeedbackChannel::Success;
    std::vector<FeedbackIssue> issues;
    std::vector<EmptyRegion> empty_regions;
    SceneMetrics metrics;
    std::string text;

    // Schema version 1, key-sorted:
    // {version, channel, issues[], empty_regions[], metrics{}, text}.
    nlohmann::json to_json() const;
};

std::vector<std::pair<std::string, Footprint>> scene_footprints(const SceneState& scene);
std::vector<std::pair<std::string, Footprint>> layout_footprints(const EvaluatedLayout& layout,
                                                                 const AssetBinding& binding);

// Maximal empty axis-aligned rectangles of the footprint raster: grid at
// `resolution`, a cell is blocked when any footprint overlaps it; rectangles
// are maximal against single-cell dilation in all four directions, filtered
// to area >= min_area, then greedily selected non-overlapping largest-first.
// min_area < 0 selects the default of 4x the smallest placed footprint.
// Each region is tagged with the nearest object and the region's dominant
// direction relative to it (front = +x, left = +y).
std::vector<EmptyRegion> detect_empty_regions(const std::vector<std::pair<std::string, Footprint>>& placed,
                                              const Bounds2D& bounds, double resolution,
                                              double min_area = -1.0);
std::vector<EmptyRegion> detect_empty_regions(const SceneState& scene, double resolution,
                                              double min_area = -1.0);

// Area of the union of convex footprints (exact polygon union).
double footprint_union_area(const std::vector<Footprint>& footprints);

// Geometry-derived metrics only; stability_score stays at its vacuous 1.0
// until success_report fills it.
SceneMetrics scene_metrics(const SceneState& scene);

FeedbackReport grammar_report(const PredicateProgram& program, std::vector<GrammarIssue> issues);

// Generic failure assembly: issues plus empty-region hints and a coverage
// estimate from whatever was placed when the solve stopped.
FeedbackReport failure_report(std::vector<FeedbackIssue> issues,
                              const std::vector<std::pair<std::string, Footprint>>& placed,
                              const Bounds2D& bounds, double resolution);

FeedbackReport diagnose_failure(const SolverFailure& failure, const AssetBinding& binding,
                                const Bounds2D& bounds, double resolution);
FeedbackReport diagnose_failure(const PlacementError& error, const std::string& object_id,
                                int statement_index, const SceneState& scene, double resolution);
FeedbackReport diagnose_failure(const PlaceInResult& partial, const std::string& container_id,
                                int statement_index, const SceneState& scene, double resolution);

// External visual scorer: implementations render the scene, send it with the
// prompt to a multimodal endpoint, and return the yes-probability.  Never
// computed locally; failures surface as SceneMetrics::vqa_error.
class VqaClient {
  public:
    virtual ~VqaClient() = default;
    virtual double score(const SceneState& scene, const std::string& scene_prompt) = 0;
};

// Stability score via perturbation sampling per object (spec override
// applies to every object; otherwise PerturbationSpec::defaults_for each),
// geometric metrics, empty-region enrichment hints, and the optional
// external visual score.
FeedbackReport success_report(const SceneState& scene, SimulationBackend& backend, uint64_t seed,
                              double resolution, const PerturbationSpec* spec = nullptr,
                              VqaClient* vqa = nullptr, const std::string& scene_prompt = "");

// Deterministic prose: one line per issue (ordered by statement index, then
// subject), one line per empty region, metric lines for success reports.
// Object ids stay in single quotes so the structured issues can be recovered
// from the text.
std::string render_text(const FeedbackReport& report);

}  // namespace scenesmith
