#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "journey/agent.hpp"
#include "journey/io.hpp"
#include "journey/pipeline.hpp"

namespace fs = std::filesystem;
using namespace journey;

namespace {

JourneyConfig load_config(const std::string& path) {
  if (path.empty()) return default_journey_config();
  return config_from_json(read_text_file(path));
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<uint64_t> seed, std::optional<int> cycles,
            const std::string& agent_backend) {
  JourneyConfig config = load_config(config_path);
  config.output_dir = out_dir;
  if (seed) config.seed = *seed;
  if (cycles) config.cycles = *cycles;
  if (!agent_backend.empty()) {
    if (agent_backend == "mock")
      config.agent.backend = AgentBackendKind::mock;
    else if (agent_backend == "http")
      config.agent.backend = AgentBackendKind::http;
    else if (agent_backend == "disabled")
      config.agent.backend = AgentBackendKind::disabled;
    else
      throw std::invalid_argument("unknown agent backend: " + agent_backend);
  }

  const JourneyRecord record = run_journey(config);
  std::cout << "journey: " << record.segments.size() << " segments, "
            << (record.complete ? "complete" : "incomplete") << ", saved to "
            << out_dir << "\n";
  if (!record.complete) {
    std::cerr << nlohmann::json{{"error", "journey incomplete"},
                                {"detail", record.error.value_or("")}}
                     .dump()
              << "\n";
    return 2;
  }
  return 0;
}

int cmd_render(const std::string& config_path, int pose_index,
               const std::string& out_dir) {
  const JourneyConfig config = load_config(config_path).normalized();
  auto [image, depth] = gen_scene(config.scene);
  const CameraIntrinsics K =
      config.intrinsics ? *config.intrinsics
                        : default_intrinsics(config.scene.width,
                                             config.scene.height);
  const PointCloud cloud = unproject(image, depth, CameraPose{}, K);
  const CameraPath path =
      make_path(CameraPose{}, config.trajectory, mix_seed(config.seed, 1000));
  if (pose_index < 0 || pose_index >= static_cast<int>(path.poses.size()))
    throw std::invalid_argument("pose index outside the camera path (0.." +
                                std::to_string(path.poses.size() - 1) + ")");
  const RenderOutput r = render(cloud, path.poses[pose_index], K);

  fs::create_directories(out_dir);
  const fs::path img_path =
      fs::path(out_dir) / ("render_" + std::to_string(pose_index) + ".ppm");
  const fs::path mask_path =
      fs::path(out_dir) / ("mask_" + std::to_string(pose_index) + ".pgm");
  write_image_8bit(img_path, r.image);
  write_mask_8bit(mask_path, r.mask);
  std::cout << "rendered pose " << pose_index << ": coverage "
            << r.mask.count() << "/" << r.mask.data.size() << " -> "
            << img_path.string() << "\n";
  return 0;
}

int cmd_sample(const std::string& prior_path, int frames, uint64_t seed,
               const std::string& out_dir) {
  MotionPatternSpec spec = default_journey_config().prior;
  if (!prior_path.empty()) {
    const JourneyConfig wrapper =
        config_from_json("{\"prior\": " + read_text_file(prior_path) + "}");
    spec = wrapper.prior;
  }
  if (frames > 0) spec.frames = frames;

  const NoiseSchedule schedule = default_schedule();
  const GmmDenoiser denoiser(gen_video_prior(spec), schedule);
  RandomSource rng(seed);
  const VideoShape shape{spec.frames, spec.height, spec.width, spec.channels};
  const Video video =
      ancestral_sample(denoiser, shape, ConditionBundle{}, schedule, rng);

  fs::create_directories(out_dir);
  const fs::path tensor_path = fs::path(out_dir) / "sample.vjt";
  write_tensor(tensor_path, video);
  const char* ext = video.channels >= 3 ? ".ppm" : ".pgm";
  for (int f = 0; f < video.frames; ++f) {
    char name[32];
    std::snprintf(name, sizeof name, "sample_f%03d%s", f, ext);
    write_image_8bit(fs::path(out_dir) / name, frame_of(video, f));
  }
  std::cout << "sampled " << video.frames << " frames -> "
            << tensor_path.string() << "\n";
  return 0;
}

int cmd_agent_probe(const std::string& fixture_path, int k) {
  ReplayAgent agent(fixture_path);
  const ScenePrompt scene =
      imagine_entities(agent, /*current_entities=*/{}, k);
  std::cout << "scene: " << scene.scene_name << "\n"
            << "entities: " << scene.description << "\n";
  const AgentTranscript transcript =
      run_cot(agent, std::nullopt, scene, AgentOptions{.k_entities = k});
  std::cout << "dynamic prompt: " << transcript.dynamic_prompt << "\n";
  for (const std::string& w : transcript.warnings)
    std::cout << "warning: " << w << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale two-stage perpetual view generation"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "journey_out", agent_backend;
  std::optional<uint64_t> seed;
  std::optional<int> cycles;

  CLI::App* run = app.add_subcommand("run", "run a full journey");
  run->add_option("--config", config_path, "journey config JSON");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed, "override config seed");
  run->add_option("--cycles", cycles, "override cycle count");
  run->add_option("--agent", agent_backend, "mock|http|disabled");

  int pose_index = 0;
  CLI::App* render_cmd =
      app.add_subcommand("render", "render one camera-path pose of the scene");
  render_cmd->add_option("--scene", config_path,
                         "journey config JSON holding the scene");
  render_cmd->add_option("--pose", pose_index, "pose index along the path");
  render_cmd->add_option("--out", out_dir, "output directory");

  std::string prior_path;
  int frames = 0;
  uint64_t sample_seed = 1;
  CLI::App* sample = app.add_subcommand("sample", "sample the video prior");
  sample->add_option("--prior", prior_path, "motion prior spec JSON");
  sample->add_option("--frames", frames, "frame count");
  sample->add_option("--seed", sample_seed, "sampling seed");
  sample->add_option("--out", out_dir, "output directory");

  std::string fixture_path;
  int k_entities = 10;
  CLI::App* agent = app.add_subcommand("agent", "agent protocol utilities");
  CLI::App* probe =
      agent->add_subcommand("probe", "replay a fixture through the protocol");
  probe->add_option("--fixture", fixture_path, "JSONL exchange fixture")
      ->required();
  probe->add_option("--k", k_entities, "entity count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(config_path, out_dir, seed, cycles, agent_backend);
    if (render_cmd->parsed()) return cmd_render(config_path, pose_index, out_dir);
    if (sample->parsed())
      return cmd_sample(prior_path, frames, sample_seed, out_dir);
    if (agent->parsed() && probe->parsed())
      return cmd_agent_probe(fixture_path, k_entities);
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", std::string(e.what())}}.dump()
              << "\n";
    return 1;
  }
  return 0;
}
