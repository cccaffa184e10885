#pragma once

#include <array>
#include <string>
#include <vector>

#include "scenesmith/physics.hpp"
#include "scenesmith/scene.hpp"

namespace scenesmith {

// Perturbation coordinates: [Δp x y z, Δr x y z, Δc x y z, Δμ, Δm].
// Nominal value is the zero vector.  Δr is applied as a reduced rotation:
// the z component adds to yaw, the x/y components tilt the object (entering
// the COM projection to first order).
constexpr int kPerturbationDim = 11;

struct PerturbationVector {
    std::array<double, kPerturbationDim> v{};

    Vec3 dp() const { return {v[0], v[1], v[2]}; }
    Vec3 dr() const { return {v[3], v[4], v[5]}; }
    Vec3 dc() const { return {v[6], v[7], v[8]}; }
    double dmu() const { return v[9]; }
    double dm() const { return v[10]; }
};

struct PerturbationSpec {
    // Per-dimension standard deviations; Σ = diag(θ²).  All must be > 0.
    std::array<double, kPerturbationDim> theta{};
    int samples = 50;  // N

    // Δp 0.005 m, Δr 2 degrees, Δc 10% of the asset extent per axis,
    // Δμ 0.05, Δm 10% of the object's mass.
    static PerturbationSpec defaults_for(const PlacedObject& object);
};

struct StabilitySample {
    PerturbationVector x;
    int label = 0;  // 1 when the scene collapsed (any object fell)
};

struct StabilityDataset {
    std::vector<StabilitySample> samples;
};

class DegenerateWeights : public std::runtime_error {
  public:
    explicit DegenerateWeights(const std::string& what) : std::runtime_error(what) {}
};

struct StabilityEstimate {
    double p_fail = 0.0;
    double effective_weight = 0.0;  // n(x), the weight mass behind the estimate
    int sample_count = 0;
};

void apply_perturbation(PlacedObject& object, const PerturbationVector& x);

// N Gaussian draws around the current state of `object_id`, each labeled by
// settling a perturbed copy of the scene (label 1 = any object fell).
// Draws that would make mass or friction negative, or push com_shift outside
// a positive-width com_shift_range axis, are rejected and redrawn whole;
// zero-width range axes only pin the base value, not the perturbation.
StabilityDataset sample_dataset(const SceneState& scene, const std::string& object_id,
                                const PerturbationSpec& spec, SimulationBackend& backend, uint64_t seed);

// Kernel-ratio estimate at `query`: wⱼ = exp(-(xⱼ-x)ᵀ Σ⁻¹ (xⱼ-x) / 2),
// p_fail = Σ wⱼ yⱼ / Σ wⱼ.  Throws DegenerateWeights when the denominator
// underflows to zero.
StabilityEstimate estimate_p_fail(const PerturbationVector& query, const StabilityDataset& data,
                                  const PerturbationSpec& spec);

struct InstabilityResult {
    SceneState scene;              // final center, settled and stable
    PerturbationVector total;      // cumulative perturbation from the input state
    double p_fail = 0.0;           // estimate at the final center's dataset
    bool no_stable_sample = false; // an iteration found no stable sample; result is the last center
    int iterations_run = 0;
};

// Hill climb toward fragile-but-standing configurations: per iteration,
// sample a dataset around the current center, and among the stable samples
// re-center on the one whose own p_fail estimate is largest.  The returned
// scene is confirmed stable by one settle of the final center.
InstabilityResult optimize_instability(const SceneState& scene, const std::string& object_id,
                                       const PerturbationSpec& spec, SimulationBackend& backend,
                                       int iterations, uint64_t seed);

}  // namespace scenesmith
