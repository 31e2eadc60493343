// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Sizes, tolerances and runtime budgets are fixed here and must not
// be loosened.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "journey/agent.hpp"
#include "journey/gmm.hpp"
#include "journey/guided.hpp"
#include "journey/io.hpp"
#include "journey/kernels.hpp"
#include "journey/pipeline.hpp"
#include "journey/random.hpp"
#include "journey/trajectory.hpp"

using namespace journey;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<bool(std::string&)> run;
};

bool check(bool ok, std::string& detail, const std::string& msg) {
  if (!ok) detail += (detail.empty() ? "" : "; ") + msg;
  return ok;
}

double mse(const Video& a, const Video& b) {
  return kernels::sum_sq_diff(a.data, b.data) / a.size();
}

// ---- 1. DDPM round trip -----------------------------------------------------

bool ddpm_round_trip(std::string& detail) {
  const NoiseSchedule s = default_schedule();
  RandomSource rng(101);
  bool ok = true;
  for (int i = 0; i < 100; ++i) {
    Video x0(2, 4, 4, 3), eps(2, 4, 4, 3);
    rng.fill_normal(x0);
    rng.fill_normal(eps);
    const int t = 1 + static_cast<int>(rng.raw() % s.timesteps);
    const Video rec = estimate_x0(diffuse_to(x0, t, s, eps), t, eps, s);
    for (size_t j = 0; j < x0.size(); ++j) {
      const double rel = std::fabs(rec.data[j] - x0.data[j]) /
                         std::max(1.0, std::fabs(x0.data[j]));
      ok &= check(rel <= 1e-10, detail,
                  "round-trip error " + std::to_string(rel) + " at triple " +
                      std::to_string(i));
      if (!ok) return false;
    }
  }
  return ok;
}

// ---- 2. score-denoiser identity ----------------------------------------------

bool score_identity(std::string& detail) {
  const NoiseSchedule s = default_schedule();
  RandomSource rng(202);
  bool ok = true;
  for (int trial = 0; trial < 50 && ok; ++trial) {
    // random shape with at most 64 total dims
    const int f = 1 + static_cast<int>(rng.raw() % 4);
    const int h = 1 + static_cast<int>(rng.raw() % 4);
    const int w = 1 + static_cast<int>(rng.raw() % 4);
    GmmPrior prior;
    const int k = 1 + static_cast<int>(rng.raw() % 5);
    std::vector<double> weights(k);
    double total = 0.0;
    for (double& wt : weights) total += (wt = 0.1 + rng.uniform());
    for (int i = 0; i < k; ++i) {
      GmmComponent comp;
      comp.weight = weights[i] / total;
      comp.mean = Video(f, h, w, 1);
      rng.fill_normal(comp.mean);
      comp.sigma = rng.uniform() < 0.3 ? 0.0 : 0.2 + rng.uniform();
      prior.components.push_back(std::move(comp));
    }
    double wsum = 0.0;
    for (const GmmComponent& comp : prior.components) wsum += comp.weight;
    for (GmmComponent& comp : prior.components) comp.weight /= wsum;

    Video x(f, h, w, 1);
    rng.fill_normal(x);
    const int t = 1 + static_cast<int>(rng.raw() % s.timesteps);
    const double ab = s.alpha_bar_at(t);
    const Video eps = gmm_predict_eps(x, t, prior, s);

    const double hstep = 1e-5;
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      Video xp = x, xm = x;
      xp.data[i] += hstep;
      xm.data[i] -= hstep;
      const double fd = (gmm_log_marginal(xp, t, prior, s) -
                         gmm_log_marginal(xm, t, prior, s)) /
                        (2 * hstep);
      const double analytic = -eps.data[i] / std::sqrt(1.0 - ab);
      num += (fd - analytic) * (fd - analytic);
      den += analytic * analytic;
    }
    const double rel = std::sqrt(num) / std::max(1e-12, std::sqrt(den));
    ok &= check(rel <= 1e-4, detail,
                "trial " + std::to_string(trial) + " relative error " +
                    std::to_string(rel));
  }
  return ok;
}

// ---- 3. unguided chain statistics ---------------------------------------------

bool unguided_statistics(std::string& detail) {
  const NoiseSchedule s = default_schedule();
  GmmPrior prior;
  prior.components.push_back({1.0, Video(1, 1, 1, 1, 0.0), 1.0, ""});
  const GmmDenoiser denoiser(prior, s);

  const int chains = 10000;
  std::vector<double> out(chains);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < chains; ++i) {
    RandomSource rng(mix_seed(303, i));
    out[i] = ancestral_sample(denoiser, VideoShape{1, 1, 1, 1},
                              ConditionBundle{}, s, rng)
                 .data[0];
  }
  double sum = 0.0, sum_sq = 0.0;
  for (double v : out) {
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / chains;
  const double var = sum_sq / chains - mean * mean;
  bool ok = check(std::fabs(mean) < 0.05, detail,
                  "mean " + std::to_string(mean));
  ok &= check(var >= 0.9 && var <= 1.1, detail,
              "variance " + std::to_string(var));
  return ok;
}

// ---- 4. guided posterior selection --------------------------------------------

bool guided_selection(std::string& detail) {
  const NoiseSchedule s = default_schedule();
  const int F = 8, H = 16, W = 16;

  RandomSource init(404);
  Video a(F, H, W, 1), b(F, H, W, 1);
  for (size_t i = 0; i < a.size(); ++i) {
    a.data[i] = 0.5 * init.normal();
    b.data[i] = 0.5 * init.normal();
  }
  GmmPrior prior;
  prior.components.push_back({0.5, a, 0.0, ""});
  prior.components.push_back({0.5, b, 0.0, ""});

  // half-frame observation mask: frames 0..3 observe component A
  PriorVideo observed;
  observed.video = Video(F, H, W, 1);
  observed.mask = Video(F, H, W, 1);
  const size_t half = observed.video.size() / 2;
  for (size_t i = 0; i < half; ++i) {
    observed.mask.data[i] = 1.0;
    observed.video.data[i] = a.data[i];
  }

  const GuidanceConfig config;  // defaults: s, 20% stop, 15 rounds, pad 4
  const GmmDenoiser denoiser(prior, s);

  const int runs = 200;
  std::vector<int> correct(runs, 0), visible_ok(runs, 0);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < runs; ++i) {
    const Video out =
        guided_sample(denoiser, observed, {}, config, s, 40000 + i);
    correct[i] = mse(out, a) < mse(out, b);
    const double vis = kernels::sum_sq_diff_masked(
                           observed.mask.data, out.data, observed.video.data) /
                       half;
    visible_ok[i] = vis < 1e-3;
  }
  int n_correct = 0, n_visible = 0;
  for (int i = 0; i < runs; ++i) {
    n_correct += correct[i];
    n_visible += visible_ok[i];
  }
  bool ok = check(n_correct >= 180, detail,
                  "selected correctly " + std::to_string(n_correct) + "/200");
  ok &= check(n_visible >= 180, detail,
              "visible MSE under 1e-3 in " + std::to_string(n_visible) +
                  "/200");
  return ok;
}

// ---- 5. pinned-constant conformance ---------------------------------------------

bool constant_conformance(std::string& detail) {
  bool ok = true;

  const TrajectorySpec lin = default_linear_spec();
  ok &= check(lin.translation_total == 0.0005, detail,
              "linear translation default");
  TrajectorySpec lin_run = lin;
  lin_run.frames = 48;
  const CameraPath lp = linear_path(CameraPose{}, lin_run, 5);
  const double displacement =
      (lp.poses.back().center() - lp.poses.front().center()).norm();
  ok &= check(std::fabs(displacement - 0.0005) < 1e-15, detail,
              "measured linear displacement " + std::to_string(displacement));

  const TrajectorySpec rot = default_rotational_spec();
  ok &= check(rot.rotation_total == 0.45 && rot.translation_total == 0.0001,
              detail, "rotational defaults");
  TrajectorySpec rot_run = rot;
  rot_run.frames = 48;
  const CameraPath rp = rotational_path(CameraPose{}, rot_run);
  ok &= check(std::fabs(view_angle(rp.poses.front(), rp.poses.back()) - 0.45) <
                  1e-12,
              detail, "measured final yaw");
  ok &= check(std::fabs((rp.poses.back().center() -
                         rp.poses.front().center()).norm() -
                        0.0001) < 1e-15,
              detail, "measured rotational strafe");

  const GuidanceConfig g;
  ok &= check(g.early_stop_fraction == 0.20, detail, "early stop default");
  ok &= check(g.renoise_rounds == 15, detail, "renoise rounds default");
  ok &= check(g.pad_count == 4, detail, "pad count default");
  ok &= check(default_journey_config().frames_per_segment == 48, detail,
              "frames per segment default");

  // instrumented guided run: guidance absent in the final 20% of timesteps,
  // 15 renoise rounds per guided timestep
  const NoiseSchedule s = default_schedule();
  GmmPrior prior;
  Video mean(1, 4, 4, 1, 0.0);
  prior.components.push_back({1.0, mean, 1.0, ""});
  PriorVideo observed;
  observed.video = Video(1, 4, 4, 1, 0.0);
  observed.mask = Video(1, 4, 4, 1, 1.0);
  const int t_c = g.cutoff_step(s.timesteps);
  int late_guidance = 0, early_steps_with_guidance = 0;
  std::vector<int> renoise_count(s.timesteps + 1, 0);
  guided_sample(GmmDenoiser(prior, s), observed, {}, g, s, 99,
                [&](const StepEvent& e) {
                  if (e.t <= s.timesteps / 5 && e.guidance_applied)
                    ++late_guidance;
                  if (e.t > t_c && e.round == 0 && e.guidance_applied)
                    ++early_steps_with_guidance;
                  if (e.renoised) ++renoise_count[e.t];
                });
  ok &= check(late_guidance == 0, detail,
              "guidance events in the final 20% of steps");
  ok &= check(early_steps_with_guidance == s.timesteps - t_c, detail,
              "guidance missing from active steps");
  bool renoise_ok = true;
  for (int t = t_c + 1; t <= s.timesteps; ++t)
    renoise_ok &= renoise_count[t] == 15;
  for (int t = 1; t <= t_c; ++t) renoise_ok &= renoise_count[t] == 0;
  ok &= check(renoise_ok, detail, "renoise round counts");

  // padding arithmetic: 48-frame prior padded by 4 on each end, removed after
  PriorVideo p48;
  p48.video = Video(48, 2, 2, 1);
  p48.mask = Video(48, 2, 2, 1, 1.0);
  const PriorVideo padded = pad_views(p48, g.pad_count);
  ok &= check(padded.video.frames == 56, detail, "padded frame count");
  ok &= check(unpad_views(padded, g.pad_count).video.frames == 48, detail,
              "unpadded frame count");
  return ok;
}

// ---- 6. geometry round trip -----------------------------------------------------

bool geometry_round_trip(std::string& detail) {
  RandomSource rng(606);
  bool ok = true;
  for (int trial = 0; trial < 20 && ok; ++trial) {
    SceneSpec spec;
    spec.seed = rng.raw();
    spec.height = 8 + static_cast<int>(rng.raw() % 17);
    spec.width = 8 + static_cast<int>(rng.raw() % 17);
    const int layer_count = 1 + static_cast<int>(rng.raw() % 3);
    spec.layers.clear();
    double depth = 1.0 + rng.uniform();
    for (int l = 0; l < layer_count; ++l) {
      SceneLayer layer;
      layer.depth = depth;
      depth += 0.5 + rng.uniform();
      layer.texture = static_cast<TextureKind>(rng.raw() % 3);
      if (l + 1 < layer_count)
        layer.extent = {rng.uniform() * 0.4, rng.uniform() * 0.4,
                        0.6 + rng.uniform() * 0.4, 0.6 + rng.uniform() * 0.4};
      spec.layers.push_back(layer);
    }
    auto [image, depth_map] = gen_scene(spec);
    const CameraIntrinsics K = default_intrinsics(spec.width, spec.height);
    const RenderOutput out =
        render(unproject(image, depth_map, CameraPose{}, K), CameraPose{}, K);

    const double coverage =
        static_cast<double>(out.mask.count()) / out.mask.data.size();
    ok &= check(coverage >= 0.99, detail,
                "coverage " + std::to_string(coverage) + " at trial " +
                    std::to_string(trial));
    for (int y = 0; y < spec.height && ok; ++y)
      for (int x = 0; x < spec.width && ok; ++x) {
        if (out.mask.at(y, x) == 0.0) continue;
        for (int c = 0; c < 3; ++c)
          ok &= check(out.image.at(y, x, c) == image.at(y, x, c), detail,
                      "pixel mismatch at trial " + std::to_string(trial));
      }
  }

  // planar scaling: d=2, camera back 0.5, imaged width ratio d/(d+delta)
  const int W = 64, H = 8;
  const double d = 2.0, delta = 0.5;
  const CameraIntrinsics K = default_intrinsics(W, H);
  const Image plane = make_pattern_image(TextureKind::checker, H, W, 3, 3);
  DepthMap depth(H, W, d);
  const PointCloud cloud = unproject(plane, depth, CameraPose{}, K);
  CameraPose back;
  back.translation = {0.0, 0.0, delta};
  const RenderOutput far = render(cloud, back, K);
  int min_x = W, max_x = -1;
  for (int x = 0; x < W; ++x)
    if (far.mask.at(H / 2, x) != 0.0) {
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
    }
  const double measured = max_x - min_x;
  const double expected = (W - 1) * d / (d + delta);
  return check(std::fabs(measured - expected) <= 1.0, detail,
               "planar width " + std::to_string(measured) + " vs " +
                   std::to_string(expected)) &&
         ok;
}

// ---- 7. agent protocol -----------------------------------------------------------

bool agent_protocol(std::string& detail) {
  const std::string fixture_dir = JOURNEY_FIXTURE_DIR;
  bool ok = true;

  const std::string scene_raw =
      read_text_file(fixture_dir + "/reference_scene.txt");
  const size_t colon = scene_raw.find(':');
  ok &= check(scene_raw.substr(0, colon) == "Dragon Temple Garden", detail,
              "scene name parse");

  const ParsedResponse parsed =
      parse_agent_response(read_text_file(fixture_dir + "/reference_cot.txt"));
  ok &= check(parsed.dynamic_prompt ==
                  "The dragon's wings flap. The smoke wafts. The lanterns "
                  "swing.",
              detail, "dynamic prompt parse");

  MockAgent mock;
  const ScenePrompt imagined = imagine_entities(mock, {}, 10);
  ok &= check(imagined.scene_name == "Dragon Temple Garden", detail,
              "mock scene name");
  ok &= check("Dragon Temple Garden: " + imagined.description == scene_raw,
              detail, "mock scene description");

  // byte-deterministic mock journey, two runs, two directories
  JourneyConfig config = default_journey_config();
  config.cycles = 2;
  config.seed = 7070;
  const fs::path dir_a = fs::temp_directory_path() / "journey_accept_det_a";
  const fs::path dir_b = fs::temp_directory_path() / "journey_accept_det_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  config.output_dir = dir_a.string();
  const JourneyRecord rec_a = run_journey(config);
  config.output_dir = dir_b.string();
  const JourneyRecord rec_b = run_journey(config);
  ok &= check(rec_a.complete && rec_b.complete, detail, "journeys complete");
  ok &= check(rec_a == rec_b, detail, "in-memory record determinism");
  ok &= check(read_text_file(dir_a / "journey.json") ==
                  read_text_file(dir_b / "journey.json"),
              detail, "manifest bytes");
  for (int i = 0; i < 4; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "seg%03d.vjt", i);
    ok &= check(read_text_file(dir_a / name) == read_text_file(dir_b / name),
                detail, std::string("frame bytes ") + name);
  }
  return ok;
}

// ---- 8. end-to-end structural ------------------------------------------------------

bool end_to_end(std::string& detail) {
  JourneyConfig config = default_journey_config();
  config.cycles = 2;
  config.seed = 8080;
  const fs::path dir = fs::temp_directory_path() / "journey_accept_e2e";
  fs::remove_all(dir);
  config.output_dir = dir.string();

  const JourneyRecord record = run_journey(config);
  bool ok = check(record.complete, detail,
                  "journey incomplete: " + record.error.value_or(""));
  ok &= check(record.segments.size() == 4, detail, "segment count");
  for (size_t i = 0; i < record.segments.size(); ++i) {
    const SegmentKind expect =
        i % 2 == 0 ? SegmentKind::spatial : SegmentKind::dynamics;
    ok &= check(record.segments[i].kind == expect, detail,
                "segment " + std::to_string(i) + " kind");
    ok &= check(record.segments[i].frames.frames == 48, detail,
                "segment " + std::to_string(i) + " frame count");
  }
  for (size_t i = 1; i < record.segments.size() && ok; ++i) {
    const Video& prev = record.segments[i - 1].frames;
    ok &= check(frame_of(prev, prev.frames - 1) ==
                    frame_of(record.segments[i].frames, 0),
                detail, "boundary " + std::to_string(i));
  }
  const JourneyRecord loaded = load_journey(dir);
  ok &= check(loaded == record, detail, "manifest reload equality");
  return ok;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "DDPM round-trip identity (100 triples, 1e-10)", 1.0,
       ddpm_round_trip},
      {2, "score-denoiser identity vs finite differences (50 priors, 1e-4)",
       10.0, score_identity},
      {3, "unguided chain statistics (10^4 chains, T=1000)", 60.0,
       unguided_statistics},
      {4, "guided posterior selection (200 runs, >=90%, MSE<1e-3)", 600.0,
       guided_selection},
      {5, "pinned default constants (trajectory, guidance, frames)", 60.0, constant_conformance},
      {6, "geometry round trip (20 scenes) + planar scaling", 10.0,
       geometry_round_trip},
      {7, "agent protocol fixtures + byte-deterministic journey", 900.0,
       agent_protocol},
      {8, "end-to-end structural journey (cycles=2)", 900.0, end_to_end},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (elapsed > c.budget_seconds) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + std::string("over budget ") +
                std::to_string(c.budget_seconds) + "s";
    }
    std::printf("%s criterion %d: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL",
                c.id, c.name.c_str(), elapsed, detail.empty() ? "" : " -- ",
                detail.c_str());
    std::fflush(stdout);
    failures += !ok;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
