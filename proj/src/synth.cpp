#include "journey/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "journey/random.hpp"

namespace journey {

void SceneSpec::validate() const {
  if (height < 1 || width < 1 || channels < 1)
    throw std::invalid_argument("scene: empty image plane");
  if (layers.empty()) throw std::invalid_argument("scene: needs >= 1 layer");
  for (size_t i = 0; i < layers.size(); ++i) {
    if (!(layers[i].depth > 0.0))
      throw std::invalid_argument("scene: layer depth must be positive");
    if (i > 0 && !(layers[i].depth > layers[i - 1].depth))
      throw std::invalid_argument("scene: layer depths must strictly increase");
  }
  if (!layers.back().extent.full())
    throw std::invalid_argument(
        "scene: deepest layer must cover the full image");
}

void MotionPatternSpec::validate() const {
  if (frames < 1 || height < 1 || width < 1 || channels < 1)
    throw std::invalid_argument("motion prior: empty video shape");
  if (component_sigma < 0.0)
    throw std::invalid_argument("motion prior: negative sigma");
  if (patterns.empty())
    throw std::invalid_argument("motion prior: needs >= 1 pattern");
  double total = 0.0;
  for (const MotionPattern& p : patterns) {
    if (p.weight < 0.0)
      throw std::invalid_argument("motion prior: negative weight");
    total += p.weight;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw std::invalid_argument("motion prior: weights sum to " +
                                std::to_string(total) + ", expected 1");
}

namespace {

// Three fixed palettes cycled by seed so different layers stay telling apart.
std::array<double, 3> palette_color(uint64_t seed, int slot) {
  static const std::array<std::array<double, 3>, 6> colors = {{
      {0.9, 0.2, 0.2},
      {0.95, 0.95, 0.95},
      {0.2, 0.45, 0.85},
      {0.1, 0.1, 0.2},
      {0.25, 0.75, 0.35},
      {0.85, 0.8, 0.3},
  }};
  return colors[(seed * 2 + slot) % colors.size()];
}

}  // namespace

Image make_pattern_image(TextureKind kind, int height, int width, int channels,
                         uint64_t seed) {
  Image im(height, width, channels);
  const auto a = palette_color(seed, 0);
  const auto b = palette_color(seed, 1);
  switch (kind) {
    case TextureKind::checker: {
      const int cell = std::max(1, std::min(height, width) / 4);
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
          const bool on = ((x / cell) + (y / cell)) % 2 == 0;
          for (int c = 0; c < channels; ++c)
            im.at(y, x, c) = (on ? a : b)[c % 3];
        }
      break;
    }
    case TextureKind::gradient: {
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
          const double t = width > 1 ? static_cast<double>(x) / (width - 1) : 0;
          for (int c = 0; c < channels; ++c)
            im.at(y, x, c) = (1.0 - t) * a[c % 3] + t * b[c % 3];
        }
      break;
    }
    case TextureKind::noise: {
      RandomSource rng(mix_seed(seed, 0xfeed));
      for (double& v : im.data) v = rng.uniform();
      break;
    }
  }
  return im;
}

std::pair<Image, DepthMap> gen_scene(const SceneSpec& spec) {
  spec.validate();
  Image image(spec.height, spec.width, spec.channels);
  DepthMap depth(spec.height, spec.width, 0.0);

  // Nearest-first composite: the first layer covering a pixel wins.
  std::vector<Image> textures;
  textures.reserve(spec.layers.size());
  for (size_t i = 0; i < spec.layers.size(); ++i)
    textures.push_back(make_pattern_image(spec.layers[i].texture, spec.height,
                                          spec.width, spec.channels,
                                          mix_seed(spec.seed, i)));

  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      for (size_t i = 0; i < spec.layers.size(); ++i) {
        const Extent& e = spec.layers[i].extent;
        const double nx = (x + 0.5) / spec.width;
        const double ny = (y + 0.5) / spec.height;
        if (nx < e.x0 || nx >= e.x1 || ny < e.y0 || ny >= e.y1) continue;
        depth.at(y, x) = spec.layers[i].depth;
        for (int c = 0; c < spec.channels; ++c)
          image.at(y, x, c) = textures[i].at(y, x, c);
        break;
      }
    }
  depth.validate();
  return {std::move(image), std::move(depth)};
}

GmmPrior gen_video_prior(const MotionPatternSpec& spec) {
  spec.validate();
  GmmPrior prior;
  prior.components.reserve(spec.patterns.size());
  for (size_t k = 0; k < spec.patterns.size(); ++k) {
    const MotionPattern& p = spec.patterns[k];
    const uint64_t tex_seed =
        p.texture_seed ? *p.texture_seed : mix_seed(spec.seed, k);
    const Image base = make_pattern_image(p.texture, spec.height, spec.width,
                                          spec.channels, tex_seed);
    GmmComponent comp;
    comp.weight = p.weight;
    comp.sigma = spec.component_sigma;
    comp.tag = p.tag;
    comp.mean = Video(spec.frames, spec.height, spec.width, spec.channels);
    for (int f = 0; f < spec.frames; ++f) {
      const long dx = std::lround(p.velocity_x * f);
      const long dy = std::lround(p.velocity_y * f);
      for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
          // wrap-around source pixel
          const int sx = static_cast<int>(
              ((x - dx) % spec.width + spec.width) % spec.width);
          const int sy = static_cast<int>(
              ((y - dy) % spec.height + spec.height) % spec.height);
          for (int c = 0; c < spec.channels; ++c)
            comp.mean.at(f, y, x, c) = base.at(sy, sx, c);
        }
    }
    prior.components.push_back(std::move(comp));
  }
  validate_prior(prior);
  return prior;
}

}  // namespace journey
