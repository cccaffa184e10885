#pragma once

#include <string>

#include "scenesmith/scene.hpp"

namespace scenesmith {

struct RenderOptions {
    double scale = 500.0;          // pixels per meter
    double margin = 24.0;          // pixels of padding around the work surface
    bool labels = true;            // object id at the footprint centroid
    bool orientation_marks = true; // tick from the centroid toward the facing direction
};

// Top-down SVG of the scene: the surface rectangle plus one footprint
// polygon per object, drawn in scene order with colors keyed by id hash.
// World +y points up, so SVG rows run along -y; every emitted number uses
// four decimals, making the output byte-stable for a given scene.
std::string render_svg(const SceneState& scene, const RenderOptions& options = {});

}  // namespace scenesmith
