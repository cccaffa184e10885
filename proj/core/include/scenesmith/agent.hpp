#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "scenesmith/feedback.hpp"
#include "scenesmith/physics.hpp"
#include "scenesmith/predicate.hpp"
#include "scenesmith/scene.hpp"

namespace scenesmith {

// The placement-language briefing sent as the system message (compiled-in
// copy of resources/system_prompt.txt, which is also installed as data).
const char* system_prompt_text();

class EndpointError : public std::runtime_error {
  public:
    explicit EndpointError(const std::string& what) : std::runtime_error(what) {}
};

struct AgentConfig {
    std::string endpoint = "http://127.0.0.1:8080/v1/chat/completions";
    std::string model = "o4-mini";
    std::string api_key_env = "LLM_API_KEY";  // name of the env var holding the key
    int max_retries = 5;                      // additional attempts after the first
    double temperature = 0.2;
    int timeout_seconds = 60;
    bool offline = false;                     // read the program from a file, no endpoint calls
    std::string offline_program_path;
    int enrichment_rounds = 1;                // extra proposals solicited after a success
    SolveConfig solve;
};

struct Message {
    std::string role;  // system | user | assistant
    std::string content;
};

struct RoundOutcome {
    int round = 0;
    std::string channel;  // parse_error | grammar | failure | success
    bool success = false;
    nlohmann::json report;
};

// Ordered conversation exactly as sent/received plus per-round solve
// outcomes.  JSONL lines are {"type":"message",...} / {"type":"outcome",...}
// with sorted keys and no timestamps, so replays compare byte-for-byte.
struct SessionTranscript {
    std::vector<Message> messages;
    std::vector<RoundOutcome> rounds;

    std::string to_jsonl() const;
    static SessionTranscript from_jsonl(const std::string& text);
};

// Chat-completions transport; implementations raise EndpointError on any
// transport, HTTP, or schema problem.
class ChatClient {
  public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const std::vector<Message>& messages, const AgentConfig& config) = 0;
};

// POST {endpoint} with {model, temperature, messages}; bearer token from
// config.api_key_env when that variable is set.  Plain HTTP only; TLS
// endpoints need an external gateway.
class HttpChatClient : public ChatClient {
  public:
    std::string complete(const std::vector<Message>& messages, const AgentConfig& config) override;
};

// Messages for one proposal round: system prompt, the table/user request,
// then one (assistant response, feedback) pair per prior round.  Throws
// std::invalid_argument on an empty scene prompt.
std::vector<Message> build_context(const std::string& scene_prompt, const Bounds2D& bounds,
                                   const std::vector<std::pair<std::string, std::string>>& history);

// The feedback user messages wrapping render_text output.
std::string retry_feedback_message(const std::string& feedback);
std::string success_feedback_message(const std::string& feedback);

struct SolveOutcome {
    bool success = false;
    SceneState scene;       // final scene; on failure, whatever was placed before the stop
    FeedbackReport report;  // grammar/failure on !success, success metrics otherwise
};

// Full solve pipeline for one program: grammar + solvedness validation,
// spatial descent, physical placements in statement order, one settle
// validation pass, then the success report.  The first failing stage
// produces the report and stops.
SolveOutcome solve_program(const PredicateProgram& program, const AssetCatalog& catalog,
                           const Bounds2D& bounds, uint64_t seed, const SolveConfig& config,
                           SimulationBackend& backend, VqaClient* vqa = nullptr,
                           const std::string& scene_prompt = "");

struct SessionResult {
    bool success = false;   // false after retries are exhausted (best partial scene kept)
    SceneState scene;
    SessionTranscript transcript;
    FeedbackReport last_report;
    int rounds = 0;
};

// propose -> solve -> feedback loop, at most config.max_retries + 1
// proposals; on success the success feedback message is appended to the
// transcript (and sent only while enrichment rounds remain).  Offline mode
// reads config.offline_program_path as the sole assistant response.  Throws
// EndpointError on transport failures.
SessionResult run_session(const std::string& scene_prompt, const AgentConfig& config,
                          const AssetCatalog& catalog, const Bounds2D& bounds, uint64_t seed,
                          ChatClient* client = nullptr);

}  // namespace scenesmith
