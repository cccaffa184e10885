#pragma once

#include <cstdint>
#include <string>

#include "scenesmith/agent.hpp"

namespace scenesmith::cli {

// Flags shared by every subcommand.  resolution 0 picks the bounds-based
// default.  out_path empty writes the primary artifact to stdout.
struct CommonOptions {
    std::string catalog_path;
    double min_x = -0.5, max_x = 0.5;
    double min_y = -0.5, max_y = 0.5;
    double top_z = 0.75;
    uint64_t seed = 0;
    double resolution = 0.0;
    int k_bottom = 1;
    int k_search = 1;
    double threshold = 0.3;
    std::string out_path;

    Bounds2D bounds() const;
    SolveConfig solve_config() const;
};

// Exit codes across subcommands: 0 ok, 1 the input program or scene fails
// its checks (a report says why), 2 unusable input (unreadable file,
// unparseable JSON, unknown object).

int cmd_validate(const CommonOptions& common, const std::string& program_path);

int cmd_solve(const CommonOptions& common, const std::string& program_path);

int cmd_stability(const CommonOptions& common, const std::string& scene_path,
                  const std::string& object_id, int samples, bool pessimize);

int cmd_render(const CommonOptions& common, const std::string& scene_path);

int cmd_generate(const CommonOptions& common, AgentConfig agent, const std::string& scene_prompt,
                 const std::string& transcript_path);

}  // namespace scenesmith::cli
