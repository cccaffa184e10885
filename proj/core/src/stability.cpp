#include "scenesmith/stability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scenesmith/rng.hpp"

namespace scenesmith {

namespace {
constexpr double kDegree = 3.14159265358979323846 / 180.0;
constexpr int kMaxRejectionDraws = 10000;

void check_spec(const PerturbationSpec& spec) {
    if (spec.samples < 1) throw std::invalid_argument("PerturbationSpec: samples must be >= 1");
    for (double t : spec.theta)
        if (!(t > 0.0)) throw std::invalid_argument("PerturbationSpec: every theta must be > 0");
}

bool in_range(const PlacedObject& object, const PerturbationVector& x) {
    if (object.mass + x.dm() <= 0.0) return false;
    if (object.friction + x.dmu() < 0.0) return false;
    const Vec3 dc = x.dc();
    const double shift[3] = {object.com_shift.x + dc.x, object.com_shift.y + dc.y,
                             object.com_shift.z + dc.z};
    for (int a = 0; a < 3; ++a) {
        const ValueRange& r = object.asset->com_shift_range[a];
        if (r.hi > r.lo && (shift[a] < r.lo || shift[a] > r.hi)) return false;
    }
    return true;
}

PerturbationVector draw_perturbation(const PlacedObject& object, const PerturbationSpec& spec, Rng& rng) {
    for (int attempt = 0; attempt < kMaxRejectionDraws; ++attempt) {
        PerturbationVector x;
        for (int i = 0; i < kPerturbationDim; ++i) x.v[i] = rng.normal(0.0, spec.theta[i]);
        if (in_range(object, x)) return x;
    }
    throw std::runtime_error("perturbation sampling: rejection failed to find an in-range draw for '" +
                             object.id + "'");
}

}  // namespace

PerturbationSpec PerturbationSpec::defaults_for(const PlacedObject& object) {
    PerturbationSpec spec;
    const Aabb3 box = object.asset->local_aabb();
    const double ext[3] = {box.max.x - box.min.x, box.max.y - box.min.y, box.max.z - box.min.z};
    for (int i = 0; i < 3; ++i) {
        spec.theta[i] = 0.005;
        spec.theta[3 + i] = 2.0 * kDegree;
        spec.theta[6 + i] = std::max(0.1 * ext[i], 1e-6);
    }
    spec.theta[9] = 0.05;
    spec.theta[10] = std::max(0.1 * object.mass, 1e-6);
    return spec;
}

void apply_perturbation(PlacedObject& object, const PerturbationVector& x) {
    object.pose.position = object.pose.position + x.dp();
    const Vec3 dr = x.dr();
    object.tilt.x += dr.x;
    object.tilt.y += dr.y;
    object.pose.yaw += dr.z;
    object.com_shift = object.com_shift + x.dc();
    object.friction += x.dmu();
    object.mass += x.dm();
}

StabilityDataset sample_dataset(const SceneState& scene, const std::string& object_id,
                                const PerturbationSpec& spec, SimulationBackend& backend,
                                uint64_t seed) {
    check_spec(spec);
    const int index = scene.index_of(object_id);
    if (index < 0) throw std::invalid_argument("sample_dataset: '" + object_id + "' is not in the scene");

    Rng rng = Rng(seed).fork(0x706572);
    StabilityDataset data;
    data.samples.reserve(spec.samples);
    for (int j = 0; j < spec.samples; ++j) {
        StabilitySample sample;
        sample.x = draw_perturbation(scene.objects[index], spec, rng);
        SceneState trial = scene;
        apply_perturbation(trial.objects[index], sample.x);
        sample.label = backend.settle(trial, 400).any_fell() ? 1 : 0;
        data.samples.push_back(sample);
    }
    return data;
}

StabilityEstimate estimate_p_fail(const PerturbationVector& query, const StabilityDataset& data,
                                  const PerturbationSpec& spec) {
    check_spec(spec);
    if (data.samples.empty()) throw std::invalid_argument("estimate_p_fail: empty dataset");

    double s = 0.0, n = 0.0;
    for (const StabilitySample& sample : data.samples) {
        double m2 = 0.0;
        for (int i = 0; i < kPerturbationDim; ++i) {
            const double d = (sample.x.v[i] - query.v[i]) / spec.theta[i];
            m2 += d * d;
        }
        const double w = std::exp(-0.5 * m2);
        s += w * sample.label;
        n += w;
    }
    if (n <= 0.0)
        throw DegenerateWeights("estimate_p_fail: every sample weight underflowed to zero");
    return {s / n, n, static_cast<int>(data.samples.size())};
}

InstabilityResult optimize_instability(const SceneState& scene, const std::string& object_id,
                                       const PerturbationSpec& spec, SimulationBackend& backend,
                                       int iterations, uint64_t seed) {
    check_spec(spec);
    const int index = scene.index_of(object_id);
    if (index < 0)
        throw std::invalid_argument("optimize_instability: '" + object_id + "' is not in the scene");

    InstabilityResult result;
    result.scene = scene;

    for (int iter = 0; iter < iterations; ++iter) {
        const StabilityDataset data =
            sample_dataset(result.scene, object_id, spec, backend, seed + 0x9e37 * (iter + 1));

        int best = -1;
        double best_p = -1.0;
        for (size_t j = 0; j < data.samples.size(); ++j) {
            if (data.samples[j].label != 0) continue;
            const double p = estimate_p_fail(data.samples[j].x, data, spec).p_fail;
            if (p > best_p) {
                best_p = p;
                best = static_cast<int>(j);
            }
        }
        if (best < 0) {
            result.no_stable_sample = true;
            break;
        }

        apply_perturbation(result.scene.objects[index], data.samples[best].x);
        for (int i = 0; i < kPerturbationDim; ++i) result.total.v[i] += data.samples[best].x.v[i];
        result.p_fail = best_p;
        result.iterations_run = iter + 1;
    }

    // One confirming settle; the deterministic backend reproduces the label
    // that admitted the final center.
    backend.settle(result.scene, 400);
    return result;
}

}  // namespace scenesmith
