#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

void add_common(CLI::App* cmd, scenesmith::cli::CommonOptions& common, bool catalog_required) {
    CLI::Option* catalog = cmd->add_option("--catalog", common.catalog_path, "asset manifest JSON");
    if (catalog_required) catalog->required();
    cmd->add_option("--bounds", [&common](const std::vector<std::string>& values) {
           // minx,maxx,miny,maxy,topz
           std::vector<double> parts;
           std::stringstream in(values.back());
           std::string token;
           while (std::getline(in, token, ',')) parts.push_back(std::stod(token));
           if (parts.size() != 5) return false;
           common.min_x = parts[0];
           common.max_x = parts[1];
           common.min_y = parts[2];
           common.max_y = parts[3];
           common.top_z = parts[4];
           return true;
       },
       "work surface as minx,maxx,miny,maxy,topz (meters)");
    cmd->add_option("--seed", common.seed, "solver seed");
    cmd->add_option("--resolution", common.resolution, "voxel size in meters (0 = auto)");
    cmd->add_option("--kbottom", common.k_bottom, "bottom-surface layer tolerance, voxels");
    cmd->add_option("--ksearch", common.k_search, "contact search depth, voxels");
    cmd->add_option("--threshold", common.threshold, "retrieval score threshold");
    cmd->add_option("--out", common.out_path, "output file (default stdout)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"placement-predicate scene solver"};
    app.require_subcommand(1);

    scenesmith::cli::CommonOptions common;
    std::string program_path;
    std::string scene_path;
    std::string object_id;
    std::string scene_prompt;
    std::string transcript_path;
    int samples = 0;
    bool pessimize = false;
    scenesmith::AgentConfig agent;

    CLI::App* validate = app.add_subcommand("validate", "check a predicate program");
    add_common(validate, common, false);
    validate->add_option("program", program_path, "predicate program JSON")->required();

    CLI::App* solve = app.add_subcommand("solve", "solve a predicate program into a scene");
    add_common(solve, common, true);
    solve->add_option("program", program_path, "predicate program JSON")->required();

    CLI::App* stability = app.add_subcommand("stability", "estimate failure probability for one object");
    add_common(stability, common, true);
    stability->add_option("scene", scene_path, "scene JSON")->required();
    stability->add_option("--object", object_id, "object id to perturb")->required();
    stability->add_option("--samples", samples, "perturbation sample count");
    stability->add_flag("--pessimize", pessimize, "hill-climb toward a fragile configuration");

    CLI::App* render = app.add_subcommand("render", "render a scene to SVG");
    add_common(render, common, true);
    render->add_option("scene", scene_path, "scene JSON")->required();

    CLI::App* generate = app.add_subcommand("generate", "run the propose-solve-feedback loop");
    add_common(generate, common, true);
    generate->add_option("prompt", scene_prompt, "scene description")->required();
    generate->add_option("--endpoint", agent.endpoint, "chat-completions URL");
    generate->add_option("--model", agent.model, "model name");
    generate->add_option("--api-key-env", agent.api_key_env, "env var holding the key");
    generate->add_option("--retries", agent.max_retries, "extra attempts after the first");
    generate->add_option("--enrichment", agent.enrichment_rounds, "extra proposals after success");
    generate->add_flag("--offline", agent.offline, "read the program from --program, no endpoint");
    generate->add_option("--program", agent.offline_program_path, "program file for --offline");
    generate->add_option("--transcript", transcript_path, "write the session transcript JSONL here");

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) return scenesmith::cli::cmd_validate(common, program_path);
    if (solve->parsed()) return scenesmith::cli::cmd_solve(common, program_path);
    if (stability->parsed())
        return scenesmith::cli::cmd_stability(common, scene_path, object_id, samples, pessimize);
    if (render->parsed()) return scenesmith::cli::cmd_render(common, scene_path);
    if (generate->parsed())
        return scenesmith::cli::cmd_generate(common, agent, scene_prompt, transcript_path);
    return 2;
}
