#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "journey/geometry.hpp"
#include "journey/gmm.hpp"
#include "journey/tensor.hpp"

namespace journey {

enum class TextureKind { checker, gradient, noise };

// Normalized image-plane rectangle [x0,x1) x [y0,y1).
struct Extent {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  bool full() const { return x0 <= 0.0 && y0 <= 0.0 && x1 >= 1.0 && y1 >= 1.0; }
  bool operator==(const Extent&) const = default;
};

struct SceneLayer {
  double depth = 1.0;  // camera-frame z, world units
  TextureKind texture = TextureKind::checker;
  Extent extent;
  bool operator==(const SceneLayer&) const = default;
};

// Procedural fronto-parallel layered scene with exact depth.
struct SceneSpec {
  uint64_t seed = 0;
  int height = 16, width = 16, channels = 3;
  std::vector<SceneLayer> layers = {{2.0, TextureKind::checker, {}}};

  void validate() const;
  bool operator==(const SceneSpec&) const = default;
};

struct MotionPattern {
  TextureKind texture = TextureKind::checker;
  double velocity_x = 0.0, velocity_y = 0.0;  // pixels per frame
  double weight = 1.0;
  std::string tag;
  // When set, overrides the per-index texture seed so patterns can share
  // content with a scene layer.
  std::optional<uint64_t> texture_seed;
  bool operator==(const MotionPattern&) const = default;
};

// Mixture of translating texture videos standing in for a learned video
// distribution.
struct MotionPatternSpec {
  uint64_t seed = 0;
  int frames = 48, height = 16, width = 16, channels = 3;
  double component_sigma = 0.0;  // 0 = finite-dataset (delta) prior
  std::vector<MotionPattern> patterns = {
      {TextureKind::checker, 0, 0, 1.0, "", {}}};

  void validate() const;
  bool operator==(const MotionPatternSpec&) const = default;
};

// Deterministic texture generator shared by scenes and motion patterns.
Image make_pattern_image(TextureKind kind, int height, int width, int channels,
                         uint64_t seed);

// Composite the layers nearest-first; the depth map records each pixel's
// winning layer depth. The deepest layer must cover the full image.
std::pair<Image, DepthMap> gen_scene(const SceneSpec& spec);

// One mixture component per pattern; the mean video translates the base image
// with wrap-around at integer per-frame offsets.
GmmPrior gen_video_prior(const MotionPatternSpec& spec);

}  // namespace journey
