#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "scenesmith/scene.hpp"

namespace scenesmith {

struct SettleEntry {
    double displacement = 0.0;  // meters, clamped to 1.0
    bool fell = false;
};

struct SettleResult {
    std::vector<SettleEntry> objects;  // parallel to scene.objects

    bool any_fell() const;
    double mean_displacement() const;  // 0.0 for an empty scene
};

// Backend contract: evolve the scene under gravity for max_steps, updating
// object poses in place, and report each object's displacement from its
// initial pose plus a fell flag.  scene.support is rebuilt from the final
// contacts.
class SimulationBackend {
  public:
    virtual ~SimulationBackend() = default;
    virtual SettleResult settle(SceneState& scene, int max_steps) = 0;
};

// Deterministic quasi-static reference backend:
//   1. drop floating objects along -z to first contact, in ascending initial
//      base-z order, quantized to the grid resolution;
//   2. record supporter -> supported contact cells into scene.support;
//   3. bottom-up statics: an object stands when the aggregate COM of itself
//      plus everything it transitively supports projects inside the convex
//      hull of its contact cell centers, and every contact satisfies
//      tan(theta) <= friction, theta estimated from the 3x3 top-surface
//      gradient around the contact;
//   4. a failed check marks the object and its supported subtree fallen with
//      displacement 1.0; survivors report their drop distance.
// Objects that find no support below them (off the surface) fall with
// displacement 1.0.  The step count only gates whether anything moves
// (max_steps <= 0 is a no-op); the statics verdict does not depend on it.
class QuasiStaticBackend : public SimulationBackend {
  public:
    explicit QuasiStaticBackend(double resolution = 0.01) : resolution_(resolution) {}

    SettleResult settle(SceneState& scene, int max_steps = 400) override;

    double resolution() const { return resolution_; }

  private:
    double resolution_;
};

// Mean clamped displacement after settling for `steps` (400 is the scene
// validation recipe).
double settle_distance(SimulationBackend& backend, SceneState& scene, int steps = 400);

// JSON-lines protocol for out-of-process backends, one JSON document per
// line.  Request: {"steps", "bounds":{min_x,max_x,min_y,max_y,top_z},
// "objects":[{"id","asset","pose":{"position":[x,y,z],"yaw"},"mass",
// "friction","com_shift":[x,y,z],"tilt":[x,y]}, ...]}.  Response:
// {"objects":[{"displacement","fell"}, ...]} in request order.
std::string settle_request_json(const SceneState& scene, int steps);
// Throws SceneFileError on malformed responses or a count mismatch.
SettleResult parse_settle_response(const std::string& line, size_t object_count);

}  // namespace scenesmith
