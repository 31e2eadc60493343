#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace journey {

// Fixed stage-I video prompt and the stage-II fallback used when no agent is
// configured.
inline constexpr const char* kFlyoverPrompt =
    "a camera flyover, cruising steadily across the scene";
inline constexpr const char* kDefaultDynamicsPrompt =
    "The video is of high quality, high dynamic, and the view is very "
    "clear...";

struct ChatMessage {
  std::string role;
  std::string text;
};

class AgentError : public std::runtime_error {
 public:
  enum class Kind { transport, protocol };
  AgentError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Raised when an agent reply cannot be parsed; carries the raw reply text.
class ResponseParseError : public std::runtime_error {
 public:
  ResponseParseError(const std::string& message, std::string raw)
      : std::runtime_error(message), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

// Chat backend abstraction. Backends may queue warnings (for example when an
// image reference has to be dropped); callers drain them into transcripts.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages,
                               const std::optional<std::string>& image_ref) = 0;
  virtual std::vector<std::string> drain_warnings() { return {}; }
};

struct ScenePrompt {
  std::string scene_name;
  std::string description;  // k comma-separated entity clauses, motion-first
  bool operator==(const ScenePrompt&) const = default;
};

enum class Level { low, medium, high };

struct EntityInfo {
  std::string name;
  Level visual_significance = Level::medium;
  Level motion_possibility = Level::medium;
  std::string motion_description;
};
using EntityList = std::vector<EntityInfo>;

struct AgentTranscript {
  std::string think_log;       // all three reasoning stages
  std::string dynamic_prompt;  // final prompt for the video sampler
  std::vector<std::pair<std::string, std::string>> raw_exchanges;
  std::vector<std::string> warnings;
  bool operator==(const AgentTranscript&) const = default;
};

enum class ParseLeniency { strict, lenient };

struct AgentOptions {
  int k_entities = 10;
  int max_retries = 2;  // transport errors only
  ParseLeniency leniency = ParseLeniency::lenient;
};

// Instruction renderers; the operative sentences are fixed.
std::string render_imagine_instruction(
    const std::vector<std::string>& current_entities, int k);
std::string render_cot_instruction(const ScenePrompt& scene);

// Ask the agent to imagine a scene around the current entities and parse
// "SceneName: clause, clause, ..." into a ScenePrompt with exactly k clauses.
ScenePrompt imagine_entities(Agent& agent,
                             const std::vector<std::string>& current_entities,
                             int k);

struct ParsedResponse {
  std::string think_log;
  std::string dynamic_prompt;
  std::vector<std::string> warnings;
};

// Extract the 'Think Log' and 'Dynamical Description' fields, tolerating
// quote-style variation, surrounding object syntax and a missing think log.
// Throws ResponseParseError when neither field is present.
ParsedResponse parse_agent_response(const std::string& raw);

// Run the three-stage chain-of-thought exchange (one combined instruction)
// and parse the reply. Transport failures are retried up to
// opts.max_retries; parse problems are warnings when lenient, errors when
// strict. The identified set may be disjoint from the scene prompt (the
// stage-1 self-identification fallback).
AgentTranscript run_cot(Agent& agent,
                        const std::optional<std::string>& image_ref,
                        const ScenePrompt& scene_prompt,
                        const AgentOptions& opts = {});

// Top-level comma-separated clauses of a scene description ("a, b, and c."
// gives {"a","b","c"}).
std::vector<std::string> split_entity_clauses(const std::string& description);

// Entities described in the transcript's second stage, in transcript order.
EntityList entities_from_transcript(const AgentTranscript& transcript);

// --- backends -------------------------------------------------------------

// One scripted entity of the rule-based mock backend.
struct MockEntity {
  std::string name;         // "Dragon wings"
  std::string clause;       // "Dragon wings fluttering"
  bool plural = false;      // verb agreement in generated sentences
  bool visible = false;     // whether the mock "sees" it in the image
  std::string description;  // stage-2 sentence(s), without trailing period
  std::string dynamic;      // final-prompt sentence
};

struct SceneFixture {
  std::string scene_name;
  std::vector<MockEntity> entities;
};

// The built-in fixture; reproduces the reference transcript byte for byte.
SceneFixture dragon_temple_fixture();

// Deterministic rule-based backend for offline runs and tests.
class MockAgent final : public Agent {
 public:
  MockAgent() : fixtures_{dragon_temple_fixture()} {}
  explicit MockAgent(std::vector<SceneFixture> fixtures);

  std::string complete(const std::vector<ChatMessage>& messages,
                       const std::optional<std::string>& image_ref) override;

 private:
  const SceneFixture& pick_fixture(const std::string& request) const;
  std::string answer_imagine(const std::string& request) const;
  std::string answer_cot(const std::string& request) const;

  std::vector<SceneFixture> fixtures_;
};

struct HttpAgentConfig {
  std::string endpoint;  // http://host:port[/path]; env JOURNEY_AGENT_ENDPOINT
  std::string model = "desk-mllm";
  std::string api_key;  // env JOURNEY_AGENT_TOKEN
  bool supports_vision = false;
  double timeout_seconds = 30.0;
};

// Chat-completion-shaped HTTP backend: POSTs {model, messages:[{role,
// content}]} and reads choices[0].message.content. When the backend supports
// vision, image_ref is sent as an inline base64 content part; otherwise it is
// dropped with a warning.
class HttpAgent final : public Agent {
 public:
  explicit HttpAgent(HttpAgentConfig config);

  std::string complete(const std::vector<ChatMessage>& messages,
                       const std::optional<std::string>& image_ref) override;
  std::vector<std::string> drain_warnings() override;

 private:
  HttpAgentConfig config_;
  std::vector<std::string> warnings_;
};

// Replays recorded exchanges from a JSONL fixture file; each line holds
// {"response": ...} plus an optional "request" to assert against.
class ReplayAgent final : public Agent {
 public:
  explicit ReplayAgent(const std::string& fixture_path);

  std::string complete(const std::vector<ChatMessage>& messages,
                       const std::optional<std::string>& image_ref) override;
  size_t remaining() const { return entries_.size() - next_; }

 private:
  struct Entry {
    std::optional<std::string> request;
    std::string response;
  };
  std::vector<Entry> entries_;
  size_t next_ = 0;
};

// Canonical single-string form of a request, used by replay fixtures.
std::string serialize_request(const std::vector<ChatMessage>& messages,
                              const std::optional<std::string>& image_ref);

}  // namespace journey
