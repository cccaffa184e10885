#include "commands.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "scenesmith/physical.hpp"
#include "scenesmith/spatial.hpp"
#include "scenesmith/stability.hpp"
#include "scenesmith/svg.hpp"

namespace scenesmith::cli {

namespace {

bool read_file(const std::string& path, std::string& text) {
    std::ifstream in(path);
    if (!in) return false;
    std::stringstream buffer;
    buffer << in.rdbuf();
    text = buffer.str();
    return true;
}

int write_output(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return 0;
    }
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "error: cannot write '" << out_path << "'\n";
        return 2;
    }
    out << text;
    return 0;
}

}  // namespace

Bounds2D CommonOptions::bounds() const { return {min_x, max_x, min_y, max_y, top_z}; }

SolveConfig CommonOptions::solve_config() const {
    SolveConfig config;
    config.resolution = resolution > 0.0 ? resolution : SolveConfig::auto_resolution(bounds());
    config.k_bottom = k_bottom;
    config.k_search = k_search;
    config.retrieval_threshold = threshold;
    return config;
}

int cmd_validate(const CommonOptions& common, const std::string& program_path) {
    std::string text;
    if (!read_file(program_path, text)) {
        std::cerr << "error: cannot read '" << program_path << "'\n";
        return 2;
    }
    AssetCatalog catalog;
    const AssetCatalog* catalog_ptr = nullptr;
    PredicateProgram program;
    try {
        if (!common.catalog_path.empty()) {
            catalog = load_catalog(common.catalog_path);
            catalog_ptr = &catalog;
        }
        program = parse_program(text);
    } catch (const ParseError& ex) {
        std::cerr << "parse error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    std::vector<GrammarIssue> issues =
        validate_grammar(program, catalog_ptr, common.solve_config().retrieval_threshold);
    const SolvednessReport solvedness = analyze_solvedness(program);
    for (const std::string& id : solvedness.unsolved) {
        GrammarIssue issue;
        issue.kind = IssueKind::NotFullySolved;
        issue.subject = id;
        issue.detail = "object is not fully constrained";
        issues.push_back(issue);
    }
    if (!issues.empty()) {
        const FeedbackReport report = grammar_report(program, std::move(issues));
        write_output(common.out_path, report.text);
        return 1;
    }
    std::ostringstream ok;
    ok << "valid: " << program.descriptions.size() << " descriptions, " << program.statements.size()
       << " statements\n";
    return write_output(common.out_path, ok.str());
}

int cmd_solve(const CommonOptions& common, const std::string& program_path) {
    std::string text;
    if (!read_file(program_path, text)) {
        std::cerr << "error: cannot read '" << program_path << "'\n";
        return 2;
    }
    try {
        const AssetCatalog catalog = load_catalog(common.catalog_path);
        const PredicateProgram program = parse_program(text);
        const SolveConfig config = common.solve_config();
        QuasiStaticBackend backend(config.resolution);
        const SolveOutcome outcome =
            solve_program(program, catalog, common.bounds(), common.seed, config, backend);
        std::cerr << outcome.report.text;
        if (!outcome.success) return 1;
        Provenance provenance;
        provenance.program_hash = fnv1a64(program.serialize());
        provenance.seed = common.seed;
        provenance.config = config;
        return write_output(common.out_path, save_scene(outcome.scene, provenance));
    } catch (const ParseError& ex) {
        std::cerr << "parse error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
}

int cmd_stability(const CommonOptions& common, const std::string& scene_path,
                  const std::string& object_id, int samples, bool pessimize) {
    std::string text;
    if (!read_file(scene_path, text)) {
        std::cerr << "error: cannot read '" << scene_path << "'\n";
        return 2;
    }
    try {
        const AssetCatalog catalog = load_catalog(common.catalog_path);
        const SceneState scene = load_scene(text, catalog);
        const int index = scene.index_of(object_id);
        if (index < 0) {
            std::cerr << "error: object '" << object_id << "' is not in the scene\n";
            return 2;
        }
        const SolveConfig config = common.solve_config();
        QuasiStaticBackend backend(config.resolution);
        PerturbationSpec spec = PerturbationSpec::defaults_for(scene.objects[index]);
        if (samples > 0) spec.samples = samples;

        nlohmann::json out{{"object", object_id}, {"samples", spec.samples}};
        if (pessimize) {
            const InstabilityResult result =
                optimize_instability(scene, object_id, spec, backend, 10, common.seed);
            out["p_fail"] = result.p_fail;
            out["iterations_run"] = result.iterations_run;
            out["no_stable_sample"] = result.no_stable_sample;
            out["total_perturbation"] = result.total.v;
        } else {
            const StabilityDataset data = sample_dataset(scene, object_id, spec, backend, common.seed);
            const StabilityEstimate estimate = estimate_p_fail(PerturbationVector{}, data, spec);
            out["p_fail"] = estimate.p_fail;
            out["effective_weight"] = estimate.effective_weight;
        }
        return write_output(common.out_path, out.dump(2) + "\n");
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
}

int cmd_render(const CommonOptions& common, const std::string& scene_path) {
    std::string text;
    if (!read_file(scene_path, text)) {
        std::cerr << "error: cannot read '" << scene_path << "'\n";
        return 2;
    }
    try {
        const AssetCatalog catalog = load_catalog(common.catalog_path);
        const SceneState scene = load_scene(text, catalog);
        return write_output(common.out_path, render_svg(scene));
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
}

int cmd_generate(const CommonOptions& common, AgentConfig agent, const std::string& scene_prompt,
                 const std::string& transcript_path) {
    try {
        const AssetCatalog catalog = load_catalog(common.catalog_path);
        agent.solve = common.solve_config();
        const SessionResult result =
            run_session(scene_prompt, agent, catalog, common.bounds(), common.seed);
        if (!transcript_path.empty()) {
            const int rc = write_output(transcript_path, result.transcript.to_jsonl());
            if (rc != 0) return rc;
        }
        std::cerr << result.last_report.text;
        if (!result.success) return 1;
        Provenance provenance;
        provenance.program_hash = fnv1a64(scene_prompt);
        provenance.seed = common.seed;
        provenance.config = agent.solve;
        return write_output(common.out_path, save_scene(result.scene, provenance));
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
}

}  // namespace scenesmith::cli
