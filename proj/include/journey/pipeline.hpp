#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "journey/agent.hpp"
#include "journey/guided.hpp"
#include "journey/synth.hpp"
#include "journey/trajectory.hpp"

namespace journey {

enum class AgentBackendKind { mock, http, disabled };
enum class DepthSourceKind { synthetic, external };

struct ScheduleConfig {
  int timesteps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  bool operator==(const ScheduleConfig&) const = default;
};

struct AgentConfig {
  AgentBackendKind backend = AgentBackendKind::mock;
  std::string endpoint;  // http backend; env JOURNEY_AGENT_ENDPOINT fallback
  std::string model = "desk-mllm";
  bool supports_vision = false;
  int k_entities = 10;
  int max_retries = 2;
  ParseLeniency leniency = ParseLeniency::lenient;
  std::vector<std::string> initial_entities;
  bool operator==(const AgentConfig&) const = default;
};

struct DepthConfig {
  DepthSourceKind source = DepthSourceKind::synthetic;
  std::string endpoint;
  double timeout_seconds = 30.0;
  bool operator==(const DepthConfig&) const = default;
};

struct ConditioningConfig {
  double match_softness = 0.0025;
  double text_boost = 4.0;
  bool operator==(const ConditioningConfig&) const = default;
};

struct JourneyConfig {
  uint64_t seed = 1;
  int cycles = 1;
  int frames_per_segment = 48;
  TrajectorySpec trajectory;
  GuidanceConfig guidance;
  ScheduleConfig schedule;
  SceneSpec scene;
  MotionPatternSpec prior;
  AgentConfig agent;
  DepthConfig depth;
  ConditioningConfig conditioning;
  std::optional<CameraIntrinsics> intrinsics;
  std::string output_dir;  // runtime destination; never serialized

  void validate() const;
  // Copy with the prior/trajectory shapes aligned to the scene and
  // frames_per_segment.
  JourneyConfig normalized() const;
  bool operator==(const JourneyConfig&) const = default;
};

// Defaults wired so the motion prior shares the scene texture: one static
// component and one drifting component tagged "dragon" (which the mock
// agent's dynamics prompt names).
JourneyConfig default_journey_config();

std::string config_to_json(const JourneyConfig& config);
JourneyConfig config_from_json(const std::string& text);

enum class SegmentKind { spatial, dynamics };

struct SegmentPrompts {
  std::optional<ScenePrompt> scene_prompt;  // entity imagination (stage I)
  std::string video_prompt;                 // flyover text or dynamics prompt
  bool operator==(const SegmentPrompts&) const = default;
};

struct JourneySegment {
  SegmentKind kind = SegmentKind::spatial;
  Video frames;  // f32-exact values; frame count = frames_per_segment
  std::optional<CameraPath> camera_path;
  SegmentPrompts prompts;
  std::optional<AgentTranscript> transcript;
  bool operator==(const JourneySegment&) const = default;
};

struct JourneyRecord {
  std::string version = "1";
  uint64_t seed = 0;
  JourneyConfig config;  // snapshot with output_dir cleared
  std::vector<JourneySegment> segments;
  std::vector<uint64_t> point_cloud_stats;  // per-cycle count after merging
  bool complete = true;
  std::optional<std::string> error;
  bool operator==(const JourneyRecord&) const = default;
};

// Monocular depth abstraction; outputs must satisfy DepthMap invariants.
class DepthEstimator {
 public:
  virtual ~DepthEstimator() = default;
  virtual DepthMap estimate(const Image& image) = 0;
};

// Desk-scale estimator: z-buffer depths of the current point cloud rendered
// at the current pose, holes filled with the scene background depth.
class SyntheticDepthEstimator final : public DepthEstimator {
 public:
  void set_context(const PointCloud* cloud, const CameraPose& pose,
                   const CameraIntrinsics& intrinsics, double background_depth);
  DepthMap estimate(const Image& image) override;

 private:
  const PointCloud* cloud_ = nullptr;
  CameraPose pose_;
  CameraIntrinsics intrinsics_;
  double background_depth_ = 1.0;
};

// POSTs {height,width,channels,image:[...]} and expects {depth:[...]}.
class HttpDepthEstimator final : public DepthEstimator {
 public:
  explicit HttpDepthEstimator(std::string endpoint, double timeout_seconds = 30);
  DepthMap estimate(const Image& image) override;

 private:
  std::string endpoint_;
  double timeout_seconds_;
};

struct JourneyState {
  Image view;  // current view, f32-exact
  CameraPose pose;
  PointCloud cloud;
  std::vector<std::string> entities;
  ScenePrompt scene_prompt;
};

// Runs the alternating two-stage loop. Stage I lifts/renders/completes the
// spatial transition; stage II prompts the agent and samples object dynamics.
class JourneyEngine {
 public:
  explicit JourneyEngine(const JourneyConfig& config,
                         std::unique_ptr<Agent> agent = nullptr,
                         std::unique_ptr<DepthEstimator> depth = nullptr);

  void init();
  JourneySegment run_stage1();
  JourneySegment run_stage2();

  const JourneyState& state() const { return state_; }
  const JourneyConfig& config() const { return config_; }
  const std::vector<uint64_t>& point_cloud_stats() const { return stats_; }
  void set_step_observer(StepObserver observer) { observer_ = std::move(observer); }

 private:
  GmmPrior stage1_video_prior(const Image& end_view) const;
  GmmPrior stage2_video_prior(const std::string& text) const;
  std::optional<std::string> stage2_image_ref();

  JourneyConfig config_;
  NoiseSchedule schedule_;
  CameraIntrinsics intrinsics_;
  std::unique_ptr<Agent> agent_;
  std::unique_ptr<DepthEstimator> depth_;
  SyntheticDepthEstimator* synthetic_depth_ = nullptr;  // owned via depth_
  JourneyState state_;
  std::vector<uint64_t> stats_;
  StepObserver observer_;
  int cycle_ = 0;
  int segment_ordinal_ = 0;
  bool initialized_ = false;
};

// Full journey: init, cycles alternations, persistence into
// config.output_dir (when set). Stage errors mark the record incomplete
// instead of discarding it.
JourneyRecord run_journey(const JourneyConfig& config);

void save_journey(const JourneyRecord& record, const std::filesystem::path& dir);
JourneyRecord load_journey(const std::filesystem::path& dir);

}  // namespace journey
