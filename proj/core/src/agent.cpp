#include "scenesmith/agent.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <variant>

#include <httplib.h>

#include "scenesmith/physical.hpp"
#include "scenesmith/spatial.hpp"

namespace scenesmith {

namespace {

std::string rtrim(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
        s.pop_back();
    return s;
}

std::string user_request_message(const std::string& scene_prompt, const Bounds2D& bounds) {
    const nlohmann::json corners = {{bounds.min_x, bounds.min_y}, {bounds.max_x, bounds.max_y}};
    return "The xy extend of the table is " + corners.dump() + ".\n The scene description is \"" +
           scene_prompt + "\".";
}

}  // namespace

std::string retry_feedback_message(const std::string& feedback) {
    return "There are some errors in previous response. Here's the feedback " + feedback +
           ". Please generate a new one to fix it and try to retain the existing relationships if "
           "possible. You should still strickly follow the output format.";
}

std::string success_feedback_message(const std::string& feedback) {
    return "The scene was generated successfully. Here's the feedback " + feedback +
           ". Please enrich the scene by adding new objects to the empty regions if appropriate, try to "
           "retain the existing relationships, and you should still strickly follow the output format.";
}

std::vector<Message> build_context(const std::string& scene_prompt, const Bounds2D& bounds,
                                   const std::vector<std::pair<std::string, std::string>>& history) {
    if (scene_prompt.empty()) throw std::invalid_argument("scene prompt is empty");
    std::vector<Message> messages;
    messages.push_back({"system", system_prompt_text()});
    messages.push_back({"user", user_request_message(scene_prompt, bounds)});
    for (const auto& [response, feedback] : history) {
        messages.push_back({"assistant", response});
        messages.push_back({"user", retry_feedback_message(feedback)});
    }
    return messages;
}

std::string SessionTranscript::to_jsonl() const {
    std::string out;
    for (const Message& m : messages) {
        const nlohmann::json line{{"type", "message"}, {"role", m.role}, {"content", m.content}};
        out += line.dump() + "\n";
    }
    for (const RoundOutcome& r : rounds) {
        const nlohmann::json line{{"type", "outcome"},   {"round", r.round},
                                  {"channel", r.channel}, {"success", r.success},
                                  {"report", r.report}};
        out += line.dump() + "\n";
    }
    return out;
}

SessionTranscript SessionTranscript::from_jsonl(const std::string& text) {
    SessionTranscript t;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const nlohmann::json j = nlohmann::json::parse(line);
            const std::string type = j.at("type").get<std::string>();
            if (type == "message") {
                t.messages.push_back({j.at("role").get<std::string>(), j.at("content").get<std::string>()});
            } else if (type == "outcome") {
                RoundOutcome o;
                o.round = j.at("round").get<int>();
                o.channel = j.at("channel").get<std::string>();
                o.success = j.at("success").get<bool>();
                o.report = j.at("report");
                t.rounds.push_back(o);
            } else {
                throw SceneFileError("transcript line " + std::to_string(lineno) +
                                     ": unknown type '" + type + "'");
            }
        } catch (const nlohmann::json::exception& ex) {
            throw SceneFileError("transcript line " + std::to_string(lineno) + ": " + ex.what());
        }
    }
    return t;
}

namespace {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port], what httplib::Client accepts
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    const std::string scheme = "http://";
    if (url.rfind(scheme, 0) != 0)
        throw EndpointError("endpoint must be a plain http URL: '" + url + "'");
    const size_t slash = url.find('/', scheme.size());
    if (slash == scheme.size()) throw EndpointError("endpoint URL has no host: '" + url + "'");
    ParsedUrl out;
    out.origin = slash == std::string::npos ? url : url.substr(0, slash);
    out.path = slash == std::string::npos ? "/" : url.substr(slash);
    return out;
}

}  // namespace

std::string HttpChatClient::complete(const std::vector<Message>& messages, const AgentConfig& config) {
    const ParsedUrl url = parse_url(config.endpoint);
    httplib::Client client(url.origin);
    client.set_connection_timeout(config.timeout_seconds, 0);
    client.set_read_timeout(config.timeout_seconds, 0);
    client.set_write_timeout(config.timeout_seconds, 0);

    httplib::Headers headers;
    if (const char* key = std::getenv(config.api_key_env.c_str()); key != nullptr && *key != '\0')
        headers.emplace("Authorization", std::string("Bearer ") + key);

    nlohmann::json body{{"model", config.model}, {"temperature", config.temperature}};
    body["messages"] = nlohmann::json::array();
    for (const Message& m : messages)
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});

    const httplib::Result res = client.Post(url.path, headers, body.dump(), "application/json");
    if (!res) throw EndpointError("endpoint unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw EndpointError("endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body);
    try {
        const nlohmann::json reply = nlohmann::json::parse(res->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& ex) {
        throw EndpointError(std::string("malformed endpoint reply: ") + ex.what());
    }
}

namespace {

// Subjects are placed with the pose the spatial pass produced; the physical
// sample stream continues from the spatial objects' draws.
PlacedObject make_proto(const std::string& id, const AssetBinding& binding, const Pose& pose, Rng& rng) {
    PlacedObject proto;
    proto.id = id;
    proto.asset = binding.find(id);
    proto.pose = pose;
    const PhysicalSample sample = sample_physical(*proto.asset, rng);
    proto.mass = sample.mass;
    proto.friction = sample.friction;
    proto.com_shift = sample.com_shift;
    return proto;
}

PlacementRequest make_request(const Statement& st) {
    PlacementRequest request;
    request.relation = st.relation;
    request.target = st.reference;
    if (st.params.contains("x_offset")) request.x_offset = st.param_number("x_offset", 0.0);
    if (st.params.contains("y_offset")) request.y_offset = st.param_number("y_offset", 0.0);
    if (st.params.contains("overlap")) request.overlap = st.param_number("overlap", 0.0);
    if (st.params.contains("stability") && st.params["stability"].is_string())
        request.want_unstable = st.params["stability"].get<std::string>() == "unstable";
    return request;
}

std::string flags_missing(const SolvednessFlags& flags) {
    std::string out;
    const auto add = [&out](const char* name) {
        if (!out.empty()) out += ", ";
        out += name;
    };
    if (!flags.x) add("x");
    if (!flags.y) add("y");
    if (!flags.height) add("height");
    if (!flags.yaw) add("yaw");
    return out;
}

}  // namespace

SolveOutcome solve_program(const PredicateProgram& program, const AssetCatalog& catalog,
                           const Bounds2D& bounds, uint64_t seed, const SolveConfig& config,
                           SimulationBackend& backend, VqaClient* vqa, const std::string& scene_prompt) {
    SolveOutcome out;
    out.scene.bounds = bounds;

    std::vector<GrammarIssue> issues = validate_grammar(program, &catalog, config.retrieval_threshold);
    const SolvednessReport solvedness = analyze_solvedness(program);
    for (const std::string& id : solvedness.unsolved) {
        GrammarIssue issue;
        issue.kind = IssueKind::NotFullySolved;
        issue.entry_index = -1;
        issue.subject = id;
        issue.detail = "no statement determines its " + flags_missing(solvedness.objects.at(id));
        issues.push_back(issue);
    }
    if (!issues.empty()) {
        out.report = grammar_report(program, std::move(issues));
        return out;
    }

    SpatialResult spatial;
    try {
        spatial = optimize(program, catalog, bounds, seed, config);
    } catch (const UnsolvedObject& ex) {
        FeedbackIssue issue;
        issue.kind = "Unsolved";
        issue.subject = ex.id;
        issue.detail = std::string(ex.what()) + ".";
        out.report = failure_report({issue}, {}, bounds, config.resolution);
        return out;
    }
    const AssetBinding binding = bind_assets(program, catalog, config.retrieval_threshold);
    if (const SolverFailure* failure = std::get_if<SolverFailure>(&spatial)) {
        out.report = diagnose_failure(*failure, binding, bounds, config.resolution);
        return out;
    }
    const SolvedLayout& solved = std::get<SolvedLayout>(spatial);

    Rng sample_rng = Rng(seed).fork(0x706879);
    for (const std::string& id : solved.layout.spatial_order)
        out.scene.objects.push_back(make_proto(id, binding, solved.layout.poses.at(id), sample_rng));

    // The spatial pass asserts nothing about standing stability, so the
    // placed objects get one settle validation before anything stacks on top.
    const double delta = config.displacement_delta() + 1e-12;
    if (!out.scene.objects.empty()) {
        const SettleResult settled = backend.settle(out.scene, 400);
        std::vector<FeedbackIssue> unstable;
        for (size_t i = 0; i < settled.objects.size(); ++i) {
            const SettleEntry& entry = settled.objects[i];
            if (!entry.fell && entry.displacement <= delta) continue;
            FeedbackIssue issue;
            issue.kind = "Unstable";
            issue.subject = out.scene.objects[i].id;
            issue.magnitude = entry.displacement;
            issue.detail = "object '" + out.scene.objects[i].id +
                           "' does not rest where it was placed" +
                           (entry.fell ? " and falls off its support" : "") + ".";
            unstable.push_back(issue);
        }
        if (!unstable.empty()) {
            out.report = failure_report(std::move(unstable), scene_footprints(out.scene), bounds,
                                        config.resolution);
            return out;
        }
    }

    for (const Statement& st : program.statements) {
        if (st.relation != Relation::PlaceOn && st.relation != Relation::PlaceIn &&
            st.relation != Relation::PlaceAnywhere)
            continue;
        try {
            if (st.subject_is_batch) {
                const PlaceInResult result =
                    solve_place_in(out.scene, st.reference, st.batch, catalog, config, backend,
                                   seed ^ fnv1a64(st.reference));
                if (!result.complete()) {
                    out.report = diagnose_failure(result, st.reference, st.entry_index, out.scene,
                                                  config.resolution);
                    return out;
                }
                continue;
            }
            const PlacedObject proto =
                make_proto(st.subject, binding, solved.layout.poses.at(st.subject), sample_rng);
            const uint64_t object_seed = seed ^ fnv1a64(st.subject);
            if (st.relation == Relation::PlaceOn)
                solve_place_on(out.scene, proto, make_request(st), config, backend, object_seed);
            else if (st.relation == Relation::PlaceAnywhere)
                solve_place_anywhere(out.scene, proto, make_request(st), config, backend, object_seed);
            else
                solve_place_in_single(out.scene, proto, st.reference, config, backend, object_seed);
        } catch (const PlacementError& error) {
            const std::string& name = st.subject_is_batch ? st.reference : st.subject;
            out.report = diagnose_failure(error, name, st.entry_index, out.scene, config.resolution);
            return out;
        }
    }

    out.report = success_report(out.scene, backend, seed, config.resolution, nullptr, vqa, scene_prompt);
    out.success = true;
    return out;
}

SessionResult run_session(const std::string& scene_prompt, const AgentConfig& config,
                          const AssetCatalog& catalog, const Bounds2D& bounds, uint64_t seed,
                          ChatClient* client) {
    QuasiStaticBackend backend(config.solve.resolution);
    HttpChatClient http_client;
    if (client == nullptr && !config.offline) client = &http_client;

    SessionResult result;
    SessionTranscript& transcript = result.transcript;
    transcript.messages = build_context(scene_prompt, bounds, {});

    // Parses and solves one proposal; the partial scene is kept so an
    // exhausted session still returns the furthest state reached.
    const auto attempt = [&](const std::string& response, int round) {
        FeedbackReport report;
        bool success = false;
        bool parse_error = false;
        try {
            const PredicateProgram program = parse_program(response);
            SolveOutcome outcome =
                solve_program(program, catalog, bounds, seed, config.solve, backend, nullptr, scene_prompt);
            result.scene = std::move(outcome.scene);
            report = std::move(outcome.report);
            success = outcome.success;
        } catch (const ParseError& ex) {
            parse_error = true;
            report.channel = FeedbackChannel::Grammar;
            FeedbackIssue issue;
            issue.kind = "ParseError";
            issue.statement_index = ex.entry_index;
            issue.detail = std::string(ex.what()) + ".";
            report.issues.push_back(issue);
            report.text = render_text(report);
        }
        RoundOutcome outcome;
        outcome.round = round;
        outcome.channel = parse_error ? "parse_error" : feedback_channel_name(report.channel);
        outcome.success = success;
        outcome.report = report.to_json();
        transcript.rounds.push_back(outcome);
        return std::make_pair(success, report);
    };

    if (config.offline) {
        std::ifstream in(config.offline_program_path);
        if (!in)
            throw EndpointError("cannot read offline program file '" + config.offline_program_path + "'");
        std::stringstream buffer;
        buffer << in.rdbuf();
        const std::string response = buffer.str();
        transcript.messages.push_back({"assistant", response});
        const auto [success, report] = attempt(response, 0);
        result.success = success;
        result.last_report = report;
        result.rounds = 1;
        transcript.messages.push_back({"user", success ? success_feedback_message(rtrim(report.text))
                                                       : retry_feedback_message(rtrim(report.text))});
        return result;
    }

    SceneState best_scene;
    FeedbackReport best_report;
    int attempts_left = config.max_retries + 1;
    int enrichment_left = config.enrichment_rounds;
    while (attempts_left > 0) {
        --attempts_left;
        const std::string response = client->complete(transcript.messages, config);
        transcript.messages.push_back({"assistant", response});
        const int round = result.rounds++;
        const auto [success, report] = attempt(response, round);
        result.last_report = report;
        if (success) {
            result.success = true;
            best_scene = result.scene;
            best_report = report;
            // Recorded even when the session stops here, so transcripts state
            // what the agent would have been told.
            transcript.messages.push_back({"user", success_feedback_message(rtrim(report.text))});
            if (enrichment_left <= 0) break;
            --enrichment_left;
            continue;
        }
        if (result.success) break;  // failed enrichment keeps the earlier scene
        transcript.messages.push_back({"user", retry_feedback_message(rtrim(report.text))});
    }
    if (result.success) {
        result.scene = std::move(best_scene);
        result.last_report = std::move(best_report);
    }
    return result;
}

}  // namespace scenesmith
