#include "journey/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "json.hpp"
#include "journey/io.hpp"
#include "journey/kernels.hpp"
#include "journey/random.hpp"

namespace journey {

namespace fs = std::filesystem;
using nlohmann::json;

// --- enum <-> string --------------------------------------------------------

namespace {

template <typename E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<TrajectoryKind> kTrajectoryNames[] = {
    {TrajectoryKind::linear, "linear"},
    {TrajectoryKind::rotational, "rotational"}};
constexpr EnumName<GradMode> kGradModeNames[] = {
    {GradMode::stop_gradient, "stop-gradient"},
    {GradMode::exact_vjp, "exact-vjp"}};
constexpr EnumName<TextureKind> kTextureNames[] = {
    {TextureKind::checker, "checker"},
    {TextureKind::gradient, "gradient"},
    {TextureKind::noise, "noise"}};
constexpr EnumName<AgentBackendKind> kAgentNames[] = {
    {AgentBackendKind::mock, "mock"},
    {AgentBackendKind::http, "http"},
    {AgentBackendKind::disabled, "disabled"}};
constexpr EnumName<DepthSourceKind> kDepthNames[] = {
    {DepthSourceKind::synthetic, "synthetic"},
    {DepthSourceKind::external, "external"}};
constexpr EnumName<ParseLeniency> kLeniencyNames[] = {
    {ParseLeniency::strict, "strict"}, {ParseLeniency::lenient, "lenient"}};
constexpr EnumName<SegmentKind> kSegmentNames[] = {
    {SegmentKind::spatial, "spatial"}, {SegmentKind::dynamics, "dynamics"}};

template <typename E, size_t N>
std::string enum_to_string(const EnumName<E> (&table)[N], E value) {
  for (const auto& entry : table)
    if (entry.value == value) return entry.name;
  throw std::logic_error("unmapped enum value");
}

template <typename E, size_t N>
E enum_from_string(const EnumName<E> (&table)[N], const std::string& name,
                   const char* what) {
  for (const auto& entry : table)
    if (name == entry.name) return entry.value;
  throw std::invalid_argument(std::string("unknown ") + what + ": " + name);
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

// --- config json -------------------------------------------------------------

json trajectory_to_json(const TrajectorySpec& t) {
  return {{"kind", enum_to_string(kTrajectoryNames, t.kind)},
          {"frames", t.frames},
          {"translation_total", t.translation_total},
          {"rotation_total", t.rotation_total},
          {"sine_amplitude", t.sine_amplitude},
          {"sine_cycles", t.sine_cycles}};
}

TrajectorySpec trajectory_from_json(const json& j, TrajectorySpec t) {
  if (j.contains("kind"))
    t.kind = enum_from_string(kTrajectoryNames, j.at("kind").get<std::string>(),
                              "trajectory kind");
  read_field(j, "frames", t.frames);
  read_field(j, "translation_total", t.translation_total);
  read_field(j, "rotation_total", t.rotation_total);
  read_field(j, "sine_amplitude", t.sine_amplitude);
  read_field(j, "sine_cycles", t.sine_cycles);
  return t;
}

json guidance_to_json(const GuidanceConfig& g) {
  return {{"guidance_weight", g.guidance_weight},
          {"early_stop_fraction", g.early_stop_fraction},
          {"renoise_rounds", g.renoise_rounds},
          {"pad_count", g.pad_count},
          {"grad_mode", enum_to_string(kGradModeNames, g.grad_mode)}};
}

GuidanceConfig guidance_from_json(const json& j, GuidanceConfig g) {
  read_field(j, "guidance_weight", g.guidance_weight);
  read_field(j, "early_stop_fraction", g.early_stop_fraction);
  read_field(j, "renoise_rounds", g.renoise_rounds);
  read_field(j, "pad_count", g.pad_count);
  if (j.contains("grad_mode"))
    g.grad_mode = enum_from_string(
        kGradModeNames, j.at("grad_mode").get<std::string>(), "grad mode");
  return g;
}

json scene_to_json(const SceneSpec& s) {
  json layers = json::array();
  for (const SceneLayer& l : s.layers)
    layers.push_back({{"depth", l.depth},
                      {"texture", enum_to_string(kTextureNames, l.texture)},
                      {"extent", {l.extent.x0, l.extent.y0, l.extent.x1,
                                  l.extent.y1}}});
  return {{"seed", s.seed},
          {"height", s.height},
          {"width", s.width},
          {"channels", s.channels},
          {"layers", layers}};
}

SceneSpec scene_from_json(const json& j, SceneSpec s) {
  read_field(j, "seed", s.seed);
  read_field(j, "height", s.height);
  read_field(j, "width", s.width);
  read_field(j, "channels", s.channels);
  if (j.contains("layers")) {
    s.layers.clear();
    for (const json& lj : j.at("layers")) {
      SceneLayer l;
      read_field(lj, "depth", l.depth);
      if (lj.contains("texture"))
        l.texture = enum_from_string(
            kTextureNames, lj.at("texture").get<std::string>(), "texture");
      if (lj.contains("extent")) {
        const auto e = lj.at("extent").get<std::vector<double>>();
        if (e.size() != 4)
          throw std::invalid_argument("scene layer extent needs 4 numbers");
        l.extent = {e[0], e[1], e[2], e[3]};
      }
      s.layers.push_back(l);
    }
  }
  return s;
}

json prior_to_json(const MotionPatternSpec& p) {
  json patterns = json::array();
  for (const MotionPattern& m : p.patterns) {
    json mj = {{"texture", enum_to_string(kTextureNames, m.texture)},
               {"velocity", {m.velocity_x, m.velocity_y}},
               {"weight", m.weight},
               {"tag", m.tag}};
    if (m.texture_seed) mj["texture_seed"] = *m.texture_seed;
    patterns.push_back(mj);
  }
  return {{"seed", p.seed},
          {"frames", p.frames},
          {"height", p.height},
          {"width", p.width},
          {"channels", p.channels},
          {"component_sigma", p.component_sigma},
          {"patterns", patterns}};
}

MotionPatternSpec prior_from_json(const json& j, MotionPatternSpec p) {
  read_field(j, "seed", p.seed);
  read_field(j, "frames", p.frames);
  read_field(j, "height", p.height);
  read_field(j, "width", p.width);
  read_field(j, "channels", p.channels);
  read_field(j, "component_sigma", p.component_sigma);
  if (j.contains("patterns")) {
    p.patterns.clear();
    for (const json& mj : j.at("patterns")) {
      MotionPattern m;
      if (mj.contains("texture"))
        m.texture = enum_from_string(
            kTextureNames, mj.at("texture").get<std::string>(), "texture");
      if (mj.contains("velocity")) {
        const auto v = mj.at("velocity").get<std::vector<double>>();
        if (v.size() != 2)
          throw std::invalid_argument("pattern velocity needs 2 numbers");
        m.velocity_x = v[0];
        m.velocity_y = v[1];
      }
      read_field(mj, "weight", m.weight);
      read_field(mj, "tag", m.tag);
      if (mj.contains("texture_seed"))
        m.texture_seed = mj.at("texture_seed").get<uint64_t>();
      p.patterns.push_back(std::move(m));
    }
  }
  return p;
}

json agent_to_json(const AgentConfig& a) {
  return {{"backend", enum_to_string(kAgentNames, a.backend)},
          {"endpoint", a.endpoint},
          {"model", a.model},
          {"supports_vision", a.supports_vision},
          {"k_entities", a.k_entities},
          {"max_retries", a.max_retries},
          {"leniency", enum_to_string(kLeniencyNames, a.leniency)},
          {"initial_entities", a.initial_entities}};
}

AgentConfig agent_from_json(const json& j, AgentConfig a) {
  if (j.contains("backend"))
    a.backend = enum_from_string(
        kAgentNames, j.at("backend").get<std::string>(), "agent backend");
  read_field(j, "endpoint", a.endpoint);
  read_field(j, "model", a.model);
  read_field(j, "supports_vision", a.supports_vision);
  read_field(j, "k_entities", a.k_entities);
  read_field(j, "max_retries", a.max_retries);
  if (j.contains("leniency"))
    a.leniency = enum_from_string(
        kLeniencyNames, j.at("leniency").get<std::string>(), "leniency");
  read_field(j, "initial_entities", a.initial_entities);
  return a;
}

json config_to_json_obj(const JourneyConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["cycles"] = c.cycles;
  j["frames_per_segment"] = c.frames_per_segment;
  j["trajectory"] = trajectory_to_json(c.trajectory);
  j["guidance"] = guidance_to_json(c.guidance);
  j["schedule"] = {{"timesteps", c.schedule.timesteps},
                   {"beta_start", c.schedule.beta_start},
                   {"beta_end", c.schedule.beta_end}};
  j["scene"] = scene_to_json(c.scene);
  j["prior"] = prior_to_json(c.prior);
  j["agent"] = agent_to_json(c.agent);
  j["depth"] = {{"source", enum_to_string(kDepthNames, c.depth.source)},
                {"endpoint", c.depth.endpoint},
                {"timeout_seconds", c.depth.timeout_seconds}};
  j["conditioning"] = {{"match_softness", c.conditioning.match_softness},
                       {"text_boost", c.conditioning.text_boost}};
  if (c.intrinsics)
    j["intrinsics"] = {{"fx", c.intrinsics->fx},   {"fy", c.intrinsics->fy},
                       {"cx", c.intrinsics->cx},   {"cy", c.intrinsics->cy},
                       {"width", c.intrinsics->width},
                       {"height", c.intrinsics->height}};
  return j;
}

JourneyConfig config_from_json_obj(const json& j) {
  JourneyConfig c = default_journey_config();
  read_field(j, "seed", c.seed);
  read_field(j, "cycles", c.cycles);
  read_field(j, "frames_per_segment", c.frames_per_segment);
  if (j.contains("trajectory"))
    c.trajectory = trajectory_from_json(j.at("trajectory"), c.trajectory);
  if (j.contains("guidance"))
    c.guidance = guidance_from_json(j.at("guidance"), c.guidance);
  if (j.contains("schedule")) {
    const json& sj = j.at("schedule");
    read_field(sj, "timesteps", c.schedule.timesteps);
    read_field(sj, "beta_start", c.schedule.beta_start);
    read_field(sj, "beta_end", c.schedule.beta_end);
  }
  if (j.contains("scene")) c.scene = scene_from_json(j.at("scene"), c.scene);
  if (j.contains("prior")) c.prior = prior_from_json(j.at("prior"), c.prior);
  if (j.contains("agent")) c.agent = agent_from_json(j.at("agent"), c.agent);
  if (j.contains("depth")) {
    const json& dj = j.at("depth");
    if (dj.contains("source"))
      c.depth.source = enum_from_string(
          kDepthNames, dj.at("source").get<std::string>(), "depth source");
    read_field(dj, "endpoint", c.depth.endpoint);
    read_field(dj, "timeout_seconds", c.depth.timeout_seconds);
  }
  if (j.contains("conditioning")) {
    const json& cj = j.at("conditioning");
    read_field(cj, "match_softness", c.conditioning.match_softness);
    read_field(cj, "text_boost", c.conditioning.text_boost);
  }
  if (j.contains("intrinsics")) {
    const json& ij = j.at("intrinsics");
    CameraIntrinsics k;
    read_field(ij, "fx", k.fx);
    read_field(ij, "fy", k.fy);
    read_field(ij, "cx", k.cx);
    read_field(ij, "cy", k.cy);
    read_field(ij, "width", k.width);
    read_field(ij, "height", k.height);
    c.intrinsics = k;
  }
  return c;
}

// --- record json -------------------------------------------------------------

json pose_to_json(const CameraPose& p) {
  return {{"rotation", p.rotation.m},
          {"translation", {p.translation.x, p.translation.y, p.translation.z}}};
}

CameraPose pose_from_json(const json& j) {
  CameraPose p;
  p.rotation.m = j.at("rotation").get<std::array<double, 9>>();
  const auto t = j.at("translation").get<std::vector<double>>();
  if (t.size() != 3) throw std::invalid_argument("pose translation needs 3");
  p.translation = {t[0], t[1], t[2]};
  return p;
}

json transcript_to_json(const AgentTranscript& t) {
  json ex = json::array();
  for (const auto& [req, resp] : t.raw_exchanges)
    ex.push_back({{"request", req}, {"response", resp}});
  return {{"think_log", t.think_log},
          {"dynamic_prompt", t.dynamic_prompt},
          {"raw_exchanges", ex},
          {"warnings", t.warnings}};
}

AgentTranscript transcript_from_json(const json& j) {
  AgentTranscript t;
  read_field(j, "think_log", t.think_log);
  read_field(j, "dynamic_prompt", t.dynamic_prompt);
  if (j.contains("raw_exchanges"))
    for (const json& e : j.at("raw_exchanges"))
      t.raw_exchanges.emplace_back(e.at("request").get<std::string>(),
                                   e.at("response").get<std::string>());
  read_field(j, "warnings", t.warnings);
  return t;
}

std::string segment_file_name(size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "seg%03zu.vjt", index);
  return buf;
}

}  // namespace

std::string config_to_json(const JourneyConfig& config) {
  return config_to_json_obj(config).dump(2) + "\n";
}

JourneyConfig config_from_json(const std::string& text) {
  const json j = json::parse(text);
  return config_from_json_obj(j);
}

// --- config ------------------------------------------------------------------

void JourneyConfig::validate() const {
  if (cycles < 1) throw std::invalid_argument("config: cycles must be >= 1");
  if (frames_per_segment < 2)
    throw std::invalid_argument("config: frames_per_segment must be >= 2");
  scene.validate();
  prior.validate();
  guidance.validate();
  trajectory.validate();
  if (agent.k_entities < 1)
    throw std::invalid_argument("config: k_entities must be >= 1");
  if (agent.backend == AgentBackendKind::http && agent.endpoint.empty() &&
      !std::getenv("JOURNEY_AGENT_ENDPOINT"))
    throw std::invalid_argument("config: http agent needs an endpoint");
  if (depth.source == DepthSourceKind::external && depth.endpoint.empty())
    throw std::invalid_argument("config: external depth needs an endpoint");
  make_schedule(schedule.timesteps, schedule.beta_start, schedule.beta_end);
}

JourneyConfig JourneyConfig::normalized() const {
  JourneyConfig c = *this;
  c.trajectory.frames = c.frames_per_segment;
  c.prior.frames = c.frames_per_segment;
  c.prior.height = c.scene.height;
  c.prior.width = c.scene.width;
  c.prior.channels = c.scene.channels;
  return c;
}

JourneyConfig default_journey_config() {
  JourneyConfig c;
  c.scene.seed = 7;
  c.prior.seed = 7;
  // Both components carry the scene layer's texture; they differ only in
  // motion, so stage II selects between "hold still" and "drift".
  const uint64_t scene_texture = mix_seed(c.scene.seed, 0);
  c.prior.patterns = {
      {TextureKind::checker, 0.0, 0.0, 0.5, "", scene_texture},
      {TextureKind::checker, 1.0, 0.0, 0.5, "dragon", scene_texture},
  };
  return c.normalized();
}

// --- depth estimators ----------------------------------------------------------

void SyntheticDepthEstimator::set_context(const PointCloud* cloud,
                                          const CameraPose& pose,
                                          const CameraIntrinsics& intrinsics,
                                          double background_depth) {
  cloud_ = cloud;
  pose_ = pose;
  intrinsics_ = intrinsics;
  background_depth_ = background_depth;
}

DepthMap SyntheticDepthEstimator::estimate(const Image& image) {
  if (!cloud_)
    throw std::runtime_error("synthetic depth estimator: no scene context");
  if (image.height != intrinsics_.height || image.width != intrinsics_.width)
    throw std::invalid_argument("synthetic depth estimator: image size");
  const RenderOutput r = render(*cloud_, pose_, intrinsics_);
  DepthMap out(image.height, image.width, background_depth_);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      if (r.mask.at(y, x) != 0.0) out.at(y, x) = r.depth.at(y, x);
  out.validate();
  return out;
}

// --- engine --------------------------------------------------------------------

JourneyEngine::JourneyEngine(const JourneyConfig& config,
                             std::unique_ptr<Agent> agent,
                             std::unique_ptr<DepthEstimator> depth)
    : config_(config.normalized()) {
  config_.validate();
  schedule_ = make_schedule(config_.schedule.timesteps,
                            config_.schedule.beta_start,
                            config_.schedule.beta_end);
  intrinsics_ = config_.intrinsics
                    ? *config_.intrinsics
                    : default_intrinsics(config_.scene.width,
                                         config_.scene.height);
  intrinsics_.validate();
  if (intrinsics_.width != config_.scene.width ||
      intrinsics_.height != config_.scene.height)
    throw std::invalid_argument("config: intrinsics size differs from scene");

  if (agent) {
    agent_ = std::move(agent);
  } else {
    switch (config_.agent.backend) {
      case AgentBackendKind::mock:
        agent_ = std::make_unique<MockAgent>();
        break;
      case AgentBackendKind::http: {
        HttpAgentConfig hc;
        hc.endpoint = config_.agent.endpoint;
        hc.model = config_.agent.model;
        hc.supports_vision = config_.agent.supports_vision;
        agent_ = std::make_unique<HttpAgent>(hc);
        break;
      }
      case AgentBackendKind::disabled:
        break;
    }
  }

  if (depth) {
    depth_ = std::move(depth);
  } else if (config_.depth.source == DepthSourceKind::external) {
    depth_ = std::make_unique<HttpDepthEstimator>(
        config_.depth.endpoint, config_.depth.timeout_seconds);
  } else {
    auto synthetic = std::make_unique<SyntheticDepthEstimator>();
    synthetic_depth_ = synthetic.get();
    depth_ = std::move(synthetic);
  }
}

void JourneyEngine::init() {
  auto [image, truth_depth] = gen_scene(config_.scene);
  state_.view = quantized_f32(std::move(image));
  state_.pose = CameraPose{};
  const DepthMap depth0 =
      synthetic_depth_ ? truth_depth : depth_->estimate(state_.view);
  state_.cloud = unproject(state_.view, depth0, state_.pose, intrinsics_);
  state_.entities = config_.agent.initial_entities;
  state_.scene_prompt = {};
  stats_.clear();
  cycle_ = 0;
  segment_ordinal_ = 0;
  initialized_ = true;
}

GmmPrior JourneyEngine::stage1_video_prior(const Image& end_view) const {
  GmmPrior base = gen_video_prior(config_.prior);
  const int pad = config_.guidance.pad_count;
  for (GmmComponent& comp : base.components)
    comp.mean = pad_video(comp.mean, pad);

  ConditionOptions opts;
  opts.match_softness = config_.conditioning.match_softness;
  opts.text_boost = config_.conditioning.text_boost;
  const int fps = config_.frames_per_segment;
  for (int f = 0; f <= pad; ++f) opts.pinned_frames.emplace(f, state_.view);
  for (int f = pad + fps - 1; f < fps + 2 * pad; ++f)
    opts.pinned_frames.emplace(f, end_view);

  ConditionBundle cond;
  cond.start_frame = state_.view;
  cond.text = kFlyoverPrompt;
  return condition_prior(base, cond, opts);
}

GmmPrior JourneyEngine::stage2_video_prior(const std::string& text) const {
  ConditionBundle cond;
  cond.start_frame = state_.view;
  cond.text = text;
  ConditionOptions opts;
  opts.match_softness = config_.conditioning.match_softness;
  opts.text_boost = config_.conditioning.text_boost;
  return condition_prior(gen_video_prior(config_.prior), cond, opts);
}

std::optional<std::string> JourneyEngine::stage2_image_ref() {
  if (config_.agent.backend == AgentBackendKind::http &&
      !config_.output_dir.empty()) {
    const fs::path path = fs::path(config_.output_dir) /
                          ("stage2_view_cycle" + std::to_string(cycle_) +
                           (state_.view.channels >= 3 ? ".ppm" : ".pgm"));
    fs::create_directories(path.parent_path());
    write_image_8bit(path, state_.view);
    return fs::absolute(path).string();
  }
  return "current_view:cycle" + std::to_string(cycle_);
}

JourneySegment JourneyEngine::run_stage1() {
  if (!initialized_) throw std::logic_error("journey engine: init() not run");
  const int fps = config_.frames_per_segment;
  const CameraPath path = make_path(state_.pose, config_.trajectory,
                                    mix_seed(config_.seed, 1000 + cycle_));
  const CameraPose& end_pose = path.poses.back();

  const RenderOutput end_render = render(state_.cloud, end_pose, intrinsics_);
  if (end_render.mask.count() == 0)
    throw std::runtime_error(
        "stage I: camera left the cloud, empty render at pose index " +
        std::to_string(fps - 1));

  ScenePrompt scene_prompt;
  if (agent_)
    scene_prompt =
        imagine_entities(*agent_, state_.entities, config_.agent.k_entities);

  // Endpoint completion via single-frame guided sampling against the image
  // prior (the frame-0 slice of the motion prior).
  MotionPatternSpec image_spec = config_.prior;
  image_spec.frames = 1;
  ConditionBundle inpaint_cond;
  if (!scene_prompt.description.empty())
    inpaint_cond.text = scene_prompt.description;
  ConditionOptions inpaint_opts;
  inpaint_opts.match_softness = config_.conditioning.match_softness;
  inpaint_opts.text_boost = config_.conditioning.text_boost;
  const GmmDenoiser image_denoiser(
      condition_prior(gen_video_prior(image_spec), inpaint_cond, inpaint_opts),
      schedule_);
  const Image end_view = quantized_f32(
      inpaint_image(end_render.image, end_render.mask, image_denoiser,
                    inpaint_cond, config_.guidance, schedule_,
                    mix_seed(config_.seed, 2000 + cycle_)));

  if (synthetic_depth_)
    synthetic_depth_->set_context(&state_.cloud, end_pose, intrinsics_,
                                  config_.scene.layers.back().depth);
  const DepthMap end_depth = depth_->estimate(end_view);
  state_.cloud =
      merge(state_.cloud, unproject(end_view, end_depth, end_pose, intrinsics_));
  stats_.push_back(state_.cloud.size());

  std::vector<RenderOutput> partials;
  partials.reserve(fps - 2);
  for (int i = 1; i + 1 < fps; ++i) {
    RenderOutput r = render(state_.cloud, path.poses[i], intrinsics_);
    if (r.mask.count() == 0)
      throw std::runtime_error(
          "stage I: camera left the cloud, empty render at pose index " +
          std::to_string(i));
    partials.push_back(std::move(r));
  }

  const PriorVideo prior = build_prior(state_.view, partials, end_view);
  const PriorVideo padded = pad_views(prior, config_.guidance.pad_count);
  const GmmDenoiser video_denoiser(stage1_video_prior(end_view), schedule_);
  ConditionBundle cond;
  cond.start_frame = state_.view;
  cond.text = kFlyoverPrompt;
  const Video sampled =
      guided_sample(video_denoiser, padded, cond, config_.guidance, schedule_,
                    mix_seed(config_.seed, segment_ordinal_), observer_);

  Video frames =
      quantized_f32(unpad_video(sampled, config_.guidance.pad_count));
  set_frame(frames, 0, state_.view);
  set_frame(frames, fps - 1, end_view);

  JourneySegment segment;
  segment.kind = SegmentKind::spatial;
  segment.frames = std::move(frames);
  segment.camera_path = path;
  if (!scene_prompt.scene_name.empty()) segment.prompts.scene_prompt = scene_prompt;
  segment.prompts.video_prompt = kFlyoverPrompt;

  state_.view = end_view;
  state_.pose = end_pose;
  state_.scene_prompt = scene_prompt;
  if (agent_) state_.entities = split_entity_clauses(scene_prompt.description);
  ++segment_ordinal_;
  return segment;
}

JourneySegment JourneyEngine::run_stage2() {
  if (!initialized_) throw std::logic_error("journey engine: init() not run");
  const int fps = config_.frames_per_segment;

  std::optional<AgentTranscript> transcript;
  std::string dynamics_prompt = kDefaultDynamicsPrompt;
  if (agent_) {
    AgentOptions opts;
    opts.k_entities = config_.agent.k_entities;
    opts.max_retries = config_.agent.max_retries;
    opts.leniency = config_.agent.leniency;
    transcript = run_cot(*agent_, stage2_image_ref(), state_.scene_prompt, opts);
    dynamics_prompt = transcript->dynamic_prompt;
  }

  ConditionBundle cond;
  cond.start_frame = state_.view;
  cond.text = dynamics_prompt;
  const GmmDenoiser denoiser(stage2_video_prior(dynamics_prompt), schedule_);
  RandomSource rng(mix_seed(config_.seed, segment_ordinal_));
  const VideoShape shape{fps, config_.scene.height, config_.scene.width,
                         config_.scene.channels};
  Video frames =
      quantized_f32(ancestral_sample(denoiser, shape, cond, schedule_, rng));
  set_frame(frames, 0, state_.view);

  JourneySegment segment;
  segment.kind = SegmentKind::dynamics;
  segment.frames = frames;
  segment.prompts.video_prompt = dynamics_prompt;
  segment.transcript = std::move(transcript);

  state_.view = frame_of(segment.frames, fps - 1);
  ++segment_ordinal_;
  ++cycle_;
  return segment;
}

JourneyRecord run_journey(const JourneyConfig& config) {
  JourneyEngine engine(config);
  JourneyRecord record;
  record.seed = config.seed;
  record.config = engine.config();
  record.config.output_dir.clear();

  try {
    engine.init();
    for (int c = 0; c < config.cycles; ++c) {
      record.segments.push_back(engine.run_stage1());
      record.segments.push_back(engine.run_stage2());
    }
    record.point_cloud_stats = engine.point_cloud_stats();
  } catch (const std::exception& e) {
    record.point_cloud_stats = engine.point_cloud_stats();
    record.complete = false;
    record.error = e.what();
  }

  if (!config.output_dir.empty()) save_journey(record, config.output_dir);
  return record;
}

// --- persistence --------------------------------------------------------------

void save_journey(const JourneyRecord& record, const fs::path& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["version"] = record.version;
  manifest["seed"] = record.seed;
  manifest["complete"] = record.complete;
  if (record.error) manifest["error"] = *record.error;
  manifest["config"] = config_to_json_obj(record.config);
  manifest["point_cloud_stats"] = record.point_cloud_stats;

  json segments = json::array();
  for (size_t i = 0; i < record.segments.size(); ++i) {
    const JourneySegment& seg = record.segments[i];
    const std::string file = segment_file_name(i);
    write_tensor(dir / file, seg.frames);

    json sj;
    sj["kind"] = enum_to_string(kSegmentNames, seg.kind);
    sj["frame_files"] = {file};
    sj["checksum"] = file_checksum(dir / file);
    json prompts;
    prompts["video_prompt"] = seg.prompts.video_prompt;
    if (seg.prompts.scene_prompt)
      prompts["scene_prompt"] = {
          {"scene_name", seg.prompts.scene_prompt->scene_name},
          {"description", seg.prompts.scene_prompt->description}};
    sj["prompts"] = prompts;
    if (seg.camera_path) {
      json poses = json::array();
      for (const CameraPose& p : seg.camera_path->poses)
        poses.push_back(pose_to_json(p));
      sj["camera_path"] = {{"spec", trajectory_to_json(seg.camera_path->spec)},
                           {"poses", poses}};
    }
    if (seg.transcript) sj["transcript"] = transcript_to_json(*seg.transcript);
    segments.push_back(std::move(sj));

    // 8-bit viewing exports alongside the tensors.
    const char* ext = seg.frames.channels >= 3 ? ".ppm" : ".pgm";
    for (int f = 0; f < seg.frames.frames; ++f) {
      char name[48];
      std::snprintf(name, sizeof name, "seg%03zu_f%03d%s", i, f, ext);
      write_image_8bit(dir / name, frame_of(seg.frames, f));
    }
  }
  manifest["segments"] = std::move(segments);
  write_text_file(dir / "journey.json", manifest.dump(2) + "\n");
}

JourneyRecord load_journey(const fs::path& dir) {
  const json manifest = json::parse(read_text_file(dir / "journey.json"));
  JourneyRecord record;
  record.version = manifest.at("version").get<std::string>();
  if (record.version != "1")
    throw std::runtime_error("journey manifest version '" + record.version +
                             "' unsupported (expected \"1\")");
  record.seed = manifest.at("seed").get<uint64_t>();
  record.complete = manifest.value("complete", true);
  if (manifest.contains("error"))
    record.error = manifest.at("error").get<std::string>();
  record.config = config_from_json_obj(manifest.at("config"));
  record.point_cloud_stats =
      manifest.value("point_cloud_stats", std::vector<uint64_t>{});

  for (const json& sj : manifest.at("segments")) {
    JourneySegment seg;
    seg.kind = enum_from_string(
        kSegmentNames, sj.at("kind").get<std::string>(), "segment kind");
    const auto files = sj.at("frame_files").get<std::vector<std::string>>();
    if (files.size() != 1)
      throw std::runtime_error("journey segment must list one frame file");
    const fs::path file = dir / files[0];
    const std::string expected = sj.at("checksum").get<std::string>();
    const std::string actual = file_checksum(file);
    if (actual != expected)
      throw std::runtime_error("checksum mismatch for " + files[0] +
                               ": manifest " + expected + ", file " + actual);
    seg.frames = read_tensor(file);
    const json& prompts = sj.at("prompts");
    seg.prompts.video_prompt = prompts.at("video_prompt").get<std::string>();
    if (prompts.contains("scene_prompt"))
      seg.prompts.scene_prompt = ScenePrompt{
          prompts.at("scene_prompt").at("scene_name").get<std::string>(),
          prompts.at("scene_prompt").at("description").get<std::string>()};
    if (sj.contains("camera_path")) {
      CameraPath path;
      path.spec = trajectory_from_json(sj.at("camera_path").at("spec"),
                                       TrajectorySpec{});
      for (const json& pj : sj.at("camera_path").at("poses"))
        path.poses.push_back(pose_from_json(pj));
      seg.camera_path = std::move(path);
    }
    if (sj.contains("transcript"))
      seg.transcript = transcript_from_json(sj.at("transcript"));
    record.segments.push_back(std::move(seg));
  }
  return record;
}

}  // namespace journey
