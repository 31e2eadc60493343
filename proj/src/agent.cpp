#include "journey/agent.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace journey {

namespace {

using nlohmann::json;

const char* kImagineHead =
    "You are an intelligent scene generator. Imagine you are flying through a "
    "scene, based on the entities in the current scene, you need to imagine "
    "possible entities with common and significant visible motion in the "
    "scene. You need to generate a suitable scene name and description for "
    "the ";
const char* kImagineTail =
    " main entities in the scene. The entities within the scenes are adapted "
    "to match and fit with the scenes, and you should put entities with "
    "larger visual significance and motion possibility first.";

const char* kCotStageOne =
    "First stage (identify): You should check the objects in the list of "
    "possible dynamic objects one by one to verify if they exist in the given "
    "image. If there is no object in the list identified in the given image, "
    "then you need to identify some by yourself.";
const char* kCotStageTwo =
    "Second stage (describe): For each identified object, provide a concise "
    "description of the Visual Significance (i.e. the proportion in given "
    "image), Motion Possibility (i.e. possibility of containing strong motion "
    "in the next few seconds), and what motion it/they may have in the image.";
const char* kCotStageThree =
    "Third stage (write prompt): Based on the descriptions from the previous "
    "stage, write the final dynamical description for the scene, first "
    "describe those objects with strong visual significance and motion "
    "possibility.";

std::string lowered(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

size_t find_ci(const std::string& haystack, const std::string& needle,
               size_t from = 0) {
  return lowered(haystack).find(lowered(needle), from);
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool in_set(char c, const char* set) {
  for (const char* p = set; *p; ++p)
    if (*p == c) return true;
  return false;
}

// Step over quotes/colon/space between a field label and its value.
size_t skip_label_separator(const std::string& s, size_t pos) {
  const char* q = "'\"` \t\r\n";
  while (pos < s.size() && in_set(s[pos], q)) ++pos;
  if (pos < s.size() && s[pos] == ':') ++pos;
  while (pos < s.size() && in_set(s[pos], q)) ++pos;
  return pos;
}

std::string rtrim_value(std::string v, const char* extra) {
  while (!v.empty() && (in_set(v.back(), " \t\r\n") || in_set(v.back(), extra)))
    v.pop_back();
  return v;
}

// Grab one "Label: value" line out of a multi-line request.
std::optional<std::string> request_line_value(const std::string& request,
                                              const std::string& label) {
  const size_t pos = request.find(label);
  if (pos == std::string::npos) return std::nullopt;
  const size_t start = pos + label.size();
  const size_t end = request.find('\n', start);
  return trim(request.substr(
      start, end == std::string::npos ? std::string::npos : end - start));
}

std::string join_clauses(const std::vector<std::string>& clauses) {
  std::string out;
  for (size_t i = 0; i < clauses.size(); ++i) {
    if (i > 0) out += (i + 1 == clauses.size()) ? ", and " : ", ";
    out += clauses[i];
  }
  return out + ".";
}

}  // namespace

std::string render_imagine_instruction(
    const std::vector<std::string>& current_entities, int k) {
  std::string out = kImagineHead + std::to_string(k) + kImagineTail;
  out += "\nCurrent entities: ";
  if (current_entities.empty()) {
    out += "none";
  } else {
    for (size_t i = 0; i < current_entities.size(); ++i) {
      if (i > 0) out += ", ";
      out += current_entities[i];
    }
  }
  out += ".";
  return out;
}

std::string render_cot_instruction(const ScenePrompt& scene) {
  std::string out = std::string(kCotStageOne) + "\n" + kCotStageTwo + "\n" +
                    kCotStageThree + "\n";
  out += "Scene: " + scene.scene_name + ".\n";
  out += "Possible dynamic objects: " + scene.description + "\n";
  out +=
      "Respond with 'Think Log': '<your reasoning for all three stages>', "
      "'Dynamical Description': '<the final prompt>'.";
  return out;
}

std::vector<std::string> split_entity_clauses(const std::string& description) {
  std::vector<std::string> clauses;
  std::string desc = trim(description);
  if (!desc.empty() && desc.back() == '.') desc.pop_back();
  size_t start = 0;
  while (start <= desc.size()) {
    size_t comma = desc.find(',', start);
    std::string clause = trim(
        desc.substr(start, comma == std::string::npos ? std::string::npos
                                                      : comma - start));
    if (clause.rfind("and ", 0) == 0) clause = trim(clause.substr(4));
    if (!clause.empty()) clauses.push_back(clause);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return clauses;
}

ScenePrompt imagine_entities(Agent& agent,
                             const std::vector<std::string>& current_entities,
                             int k) {
  if (k < 1) throw std::invalid_argument("imagine_entities: k must be >= 1");
  const std::string instruction = render_imagine_instruction(current_entities, k);
  const std::string raw =
      agent.complete({{"user", instruction}}, std::nullopt);

  const size_t colon = raw.find(':');
  if (colon == std::string::npos)
    throw ResponseParseError("imagine_entities: no 'SceneName:' separator",
                             raw);
  ScenePrompt prompt;
  prompt.scene_name = rtrim_value(trim(raw.substr(0, colon)), "'\"`");
  while (!prompt.scene_name.empty() &&
         in_set(prompt.scene_name.front(), "'\"` "))
    prompt.scene_name.erase(prompt.scene_name.begin());
  prompt.description = rtrim_value(trim(raw.substr(colon + 1)), "'\"`");
  if (prompt.scene_name.empty() || prompt.description.empty())
    throw ResponseParseError("imagine_entities: empty scene name or body", raw);
  const size_t clause_count = split_entity_clauses(prompt.description).size();
  if (clause_count != static_cast<size_t>(k))
    throw ResponseParseError(
        "imagine_entities: expected " + std::to_string(k) + " entities, got " +
            std::to_string(clause_count),
        raw);
  return prompt;
}

ParsedResponse parse_agent_response(const std::string& raw) {
  ParsedResponse out;
  const std::string think_label = "Think Log";
  const std::string dyn_label = "Dynamical Description";

  size_t think_pos = raw.find(think_label);
  if (think_pos == std::string::npos) think_pos = find_ci(raw, think_label);

  // Prefer the exact capitalized label, last occurrence: stage-three
  // reasoning often mentions "dynamical description" in lower case.
  size_t dyn_pos = raw.rfind(dyn_label);
  if (dyn_pos == std::string::npos) {
    const std::string low = lowered(raw);
    dyn_pos = low.rfind(lowered(dyn_label));
  }

  if (think_pos == std::string::npos && dyn_pos == std::string::npos)
    throw ResponseParseError(
        "agent response has neither 'Think Log' nor 'Dynamical Description'",
        raw);

  if (dyn_pos != std::string::npos) {
    const size_t start = skip_label_separator(raw, dyn_pos + dyn_label.size());
    out.dynamic_prompt = rtrim_value(raw.substr(start), "'\"`,})");
  } else {
    out.warnings.push_back("missing 'Dynamical Description' field");
  }

  if (think_pos != std::string::npos &&
      (dyn_pos == std::string::npos || think_pos < dyn_pos)) {
    const size_t start =
        skip_label_separator(raw, think_pos + think_label.size());
    const size_t end = dyn_pos == std::string::npos ? raw.size() : dyn_pos;
    if (start < end)
      out.think_log = rtrim_value(raw.substr(start, end - start), "'\"`,");
  } else {
    out.warnings.push_back("missing 'Think Log' field");
  }
  return out;
}

AgentTranscript run_cot(Agent& agent,
                        const std::optional<std::string>& image_ref,
                        const ScenePrompt& scene_prompt,
                        const AgentOptions& opts) {
  const std::string instruction = render_cot_instruction(scene_prompt);
  const std::vector<ChatMessage> messages{{"user", instruction}};

  std::string raw;
  int attempt = 0;
  for (;;) {
    try {
      raw = agent.complete(messages, image_ref);
      break;
    } catch (const AgentError& e) {
      if (e.kind() != AgentError::Kind::transport || attempt >= opts.max_retries)
        throw;
      ++attempt;
    }
  }

  AgentTranscript transcript;
  transcript.raw_exchanges.emplace_back(serialize_request(messages, image_ref),
                                        raw);
  transcript.warnings = agent.drain_warnings();

  ParsedResponse parsed = parse_agent_response(raw);
  for (std::string& w : parsed.warnings)
    transcript.warnings.push_back(std::move(w));
  transcript.think_log = std::move(parsed.think_log);
  transcript.dynamic_prompt = std::move(parsed.dynamic_prompt);

  if (transcript.dynamic_prompt.empty())
    throw ResponseParseError("run_cot: missing 'Dynamical Description'", raw);

  for (const char* marker : {"first stage", "second stage", "third stage"}) {
    if (find_ci(transcript.think_log, marker) == std::string::npos) {
      const std::string msg =
          std::string("think log lacks the '") + marker + "' marker";
      if (opts.leniency == ParseLeniency::strict)
        throw ResponseParseError("run_cot: " + msg, raw);
      transcript.warnings.push_back(msg);
    }
  }
  return transcript;
}

EntityList entities_from_transcript(const AgentTranscript& transcript) {
  EntityList out;
  const std::string& think = transcript.think_log;
  size_t begin = find_ci(think, "second stage");
  if (begin == std::string::npos) return out;
  size_t end = find_ci(think, "third stage", begin);
  if (end == std::string::npos) end = think.size();
  const std::string section = think.substr(begin, end - begin);

  auto parse_level = [](const std::string& text) {
    if (find_ci(text, "high") != std::string::npos) return Level::high;
    if (find_ci(text, "low") != std::string::npos) return Level::low;
    return Level::medium;
  };

  // Entries look like "1. Dragon wings are ... (Visual Significance: High,
  // Motion Possibility: High)."
  size_t pos = 0;
  while (pos < section.size()) {
    size_t dot = section.find(". ", pos);
    if (dot == std::string::npos) break;
    bool numbered = dot > 0 && std::isdigit(static_cast<unsigned char>(
                                   section[dot - 1]));
    pos = dot + 2;
    if (!numbered) continue;
    size_t next = section.size();
    for (size_t probe = pos; probe + 1 < section.size(); ++probe) {
      if (section[probe] == '.' && probe + 2 < section.size() &&
          section[probe + 1] == ' ' &&
          std::isdigit(static_cast<unsigned char>(section[probe + 2]))) {
        next = probe + 1;
        break;
      }
    }
    const std::string entry = trim(section.substr(pos, next - pos));
    pos = next;
    if (entry.empty()) continue;

    EntityInfo info;
    size_t verb = entry.find(" are ");
    size_t is_pos = entry.find(" is ");
    if (is_pos != std::string::npos &&
        (verb == std::string::npos || is_pos < verb))
      verb = is_pos;
    info.name = verb == std::string::npos
                    ? entry.substr(0, entry.find('.'))
                    : entry.substr(0, verb);

    const size_t paren = find_ci(entry, "(Visual Significance:");
    if (paren != std::string::npos) {
      info.motion_description = trim(entry.substr(0, paren));
      const size_t motion = find_ci(entry, "Motion Possibility:", paren);
      const size_t close = entry.find(')', paren);
      info.visual_significance = parse_level(entry.substr(
          paren, (motion == std::string::npos ? close : motion) - paren));
      if (motion != std::string::npos && close != std::string::npos)
        info.motion_possibility =
            parse_level(entry.substr(motion, close - motion));
    } else {
      info.motion_description = entry;
    }
    out.push_back(std::move(info));
  }
  return out;
}

// --- mock backend -----------------------------------------------------------

SceneFixture dragon_temple_fixture() {
  SceneFixture f;
  f.scene_name = "Dragon Temple Garden";
  f.entities = {
      {"Dragon wings", "Dragon wings fluttering", true, true,
       "Dragon wings are spread and take a reasonable portion of the image. "
       "The wings seem ready to flap any moment. (Visual Significance: High, "
       "Motion Possibility: High)",
       "The dragon's wings flap."},
      {"Sakura petals", "sakura petals dropping", true, false, "", ""},
      {"Incense smoke", "incense smoke swirling", false, true,
       "Incense smoke is located in the background and takes a small portion "
       "of the image. The smoke seems to be wafting upwards. (Visual "
       "Significance: Low, Motion Possibility: High)",
       "The smoke wafts."},
      {"Lion statue's eyes", "lion statue's eyes blinking", true, false, "",
       ""},
      {"Flag", "flag rustling in the wind", false, false, "", ""},
      {"Koi fish", "koi fish swimming in the pond", false, false, "", ""},
      {"Lotus flower", "lotus flower opening", false, false, "", ""},
      {"Owl", "owl hooting on the temple", false, false, "", ""},
      {"Beads on prayer wheels", "beads on prayer wheels turning", true, false,
       "", ""},
      {"Paper lanterns", "paper lanterns swaying gently", true, true,
       "Paper lanterns are scattered throughout the scene and take a "
       "noticeable portion of the image. They seem to be gently swinging or "
       "floating. (Visual Significance: Medium, Motion Possibility: Medium)",
       "The lanterns swing."},
  };
  return f;
}

MockAgent::MockAgent(std::vector<SceneFixture> fixtures)
    : fixtures_(std::move(fixtures)) {
  if (fixtures_.empty())
    throw std::invalid_argument("MockAgent: needs at least one fixture");
}

const SceneFixture& MockAgent::pick_fixture(const std::string& request) const {
  for (const SceneFixture& f : fixtures_)
    if (find_ci(request, f.scene_name) != std::string::npos) return f;
  for (const SceneFixture& f : fixtures_)
    for (const MockEntity& e : f.entities)
      if (find_ci(request, e.name) != std::string::npos) return f;
  return fixtures_.front();
}

std::string MockAgent::answer_imagine(const std::string& request) const {
  const SceneFixture& fixture = pick_fixture(request);

  int k = 10;
  const std::string marker = "description for the ";
  if (size_t pos = request.find(marker); pos != std::string::npos) {
    k = std::atoi(request.c_str() + pos + marker.size());
    if (k < 1) k = 10;
  }

  std::vector<std::string> current;
  if (auto line = request_line_value(request, "Current entities: ");
      line && *line != "none.") {
    std::string value = *line;
    if (!value.empty() && value.back() == '.') value.pop_back();
    current = split_entity_clauses(value);
  }

  // Entities named in the current scene come first, then the rest of the
  // fixture in its (significance-descending) order.
  std::vector<const MockEntity*> ordered;
  auto matches_current = [&](const MockEntity& e) {
    for (const std::string& c : current)
      if (find_ci(c, e.name) != std::string::npos ||
          find_ci(e.name, c) != std::string::npos)
        return true;
    return false;
  };
  for (const MockEntity& e : fixture.entities)
    if (matches_current(e)) ordered.push_back(&e);
  for (const MockEntity& e : fixture.entities)
    if (!matches_current(e)) ordered.push_back(&e);

  std::vector<std::string> clauses;
  for (int i = 0; i < k; ++i) {
    if (i < static_cast<int>(ordered.size()))
      clauses.push_back(ordered[i]->clause);
    else
      clauses.push_back("distant cloud " + std::to_string(i + 1) +
                        " drifting slowly");
  }
  return fixture.scene_name + ": " + join_clauses(clauses);
}

std::string MockAgent::answer_cot(const std::string& request) const {
  const SceneFixture& fixture = pick_fixture(request);
  std::vector<std::string> clauses;
  if (auto line = request_line_value(request, "Possible dynamic objects: "))
    clauses = split_entity_clauses(*line);

  struct Resolved {
    std::string name;
    bool plural = false;
    const MockEntity* entity = nullptr;  // null for entities outside the book
  };
  std::vector<Resolved> listed;
  for (const std::string& clause : clauses) {
    Resolved r;
    const MockEntity* hit = nullptr;
    for (const MockEntity& e : fixture.entities)
      if (find_ci(clause, e.name) == 0) {
        hit = &e;
        break;
      }
    if (hit) {
      listed.push_back({hit->name, hit->plural, hit});
      continue;
    }
    // Unknown clause: treat everything before the last word as the name.
    const size_t last_space = clause.find_last_of(' ');
    r.name = last_space == std::string::npos ? clause
                                             : clause.substr(0, last_space);
    r.plural = !r.name.empty() && r.name.back() == 's';
    listed.push_back(std::move(r));
  }

  std::string think = "First stage:";
  std::vector<const MockEntity*> identified;
  for (size_t i = 0; i < listed.size(); ++i) {
    const Resolved& r = listed[i];
    const bool seen = r.entity && r.entity->visible;
    std::string name = r.name;
    if (!name.empty()) name[0] = std::toupper(static_cast<unsigned char>(name[0]));
    think += " " + std::to_string(i + 1) + ". " + name +
             (r.plural ? " are" : " is") + (seen ? "" : " not") +
             " identified in the given image.";
    if (seen) identified.push_back(r.entity);
  }
  if (identified.empty()) {
    // Stage-one fallback: self-identify the most significant known entity.
    const MockEntity& self = fixture.entities.front();
    think += " No object in the list is identified in the given image, so I "
             "identify " + self.name + " by myself.";
    identified.push_back(&self);
  }

  think += " Second Stage:";
  for (size_t i = 0; i < identified.size(); ++i)
    think += " " + std::to_string(i + 1) + ". " + identified[i]->description +
             ".";

  std::string dynamic;
  for (size_t i = 0; i < identified.size(); ++i) {
    if (i > 0) dynamic += " ";
    dynamic += identified[i]->dynamic;
  }
  think += " Third stage: The visual summary for dynamical description is '" +
           dynamic + "'";

  return "'Think Log': '" + think + "', 'Dynamical Description': '" + dynamic +
         "'";
}

std::string MockAgent::complete(const std::vector<ChatMessage>& messages,
                                const std::optional<std::string>&) {
  std::string request;
  for (const ChatMessage& m : messages) request += m.text + "\n";
  if (request.find("intelligent scene generator") != std::string::npos)
    return answer_imagine(request);
  if (request.find("First stage (identify)") != std::string::npos)
    return answer_cot(request);
  throw AgentError(AgentError::Kind::protocol,
                   "mock agent: unrecognized instruction");
}

std::string serialize_request(const std::vector<ChatMessage>& messages,
                              const std::optional<std::string>& image_ref) {
  std::string out;
  for (const ChatMessage& m : messages)
    out += m.role + ": " + m.text + "\n";
  if (image_ref) out += "[image: " + *image_ref + "]\n";
  return out;
}

// --- replay backend ---------------------------------------------------------

ReplayAgent::ReplayAgent(const std::string& fixture_path) {
  std::ifstream in(fixture_path);
  if (!in)
    throw AgentError(AgentError::Kind::transport,
                     "replay fixture not readable: " + fixture_path);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("response"))
      throw AgentError(AgentError::Kind::protocol,
                       "replay fixture line is not {\"response\": ...}: " +
                           fixture_path);
    Entry e;
    e.response = j["response"].get<std::string>();
    if (j.contains("request") && !j["request"].is_null())
      e.request = j["request"].get<std::string>();
    entries_.push_back(std::move(e));
  }
}

std::string ReplayAgent::complete(const std::vector<ChatMessage>& messages,
                                  const std::optional<std::string>& image_ref) {
  if (next_ >= entries_.size())
    throw AgentError(AgentError::Kind::transport,
                     "replay fixture exhausted after " +
                         std::to_string(entries_.size()) + " exchanges");
  const Entry& e = entries_[next_++];
  if (e.request && *e.request != serialize_request(messages, image_ref))
    throw AgentError(AgentError::Kind::protocol,
                     "replay fixture request mismatch at exchange " +
                         std::to_string(next_));
  return e.response;
}

}  // namespace journey
