#pragma once

#include <functional>
#include <vector>

#include "journey/diffusion.hpp"
#include "journey/geometry.hpp"
#include "journey/tensor.hpp"

namespace journey {

// Rendered scene-transition prior: frame sequence plus binary visibility
// masks of the same shape. The video is zero wherever the mask is zero.
struct PriorVideo {
  Video video;
  Video mask;

  void validate(bool require_full_end_masks = true) const;
};

enum class GradMode { stop_gradient, exact_vjp };

struct GuidanceConfig {
  double guidance_weight = 0.002;   // constant s_t = s
  double early_stop_fraction = 0.20;
  int renoise_rounds = 15;
  int pad_count = 4;
  GradMode grad_mode = GradMode::stop_gradient;

  void validate() const;
  bool operator==(const GuidanceConfig&) const = default;
  // First timestep with guidance disabled: guidance runs only for t > t_c.
  int cutoff_step(int timesteps) const;
};

// Assemble {input, rendered partials..., end} with all-ones masks on both
// end frames. Rendered masks are broadcast across channels.
PriorVideo build_prior(const Image& input_view,
                       const std::vector<RenderOutput>& rendered,
                       const Image& end_view);

// Replicate the first and last frames (and masks) pad_count times at each
// end.
PriorVideo pad_views(const PriorVideo& prior, int pad_count);
PriorVideo unpad_views(const PriorVideo& prior, int pad_count);
Video pad_video(const Video& v, int pad_count);
Video unpad_video(const Video& v, int pad_count);

// Gradient of || x0_hat(x_t) (.) m - x^p (.) m ||^2 with respect to x_t.
// stop_gradient treats the denoiser output as constant; exact_vjp
// back-propagates through it and requires denoiser.has_vjp().
Video guidance_grad(const Video& x_t, int t, const PriorVideo& prior,
                    const Denoiser& denoiser, const ConditionBundle& cond,
                    const NoiseSchedule& schedule, GradMode mode);

// Fired once per denoise pass (a timestep runs renoise_rounds+1 passes while
// guidance is active).
struct StepEvent {
  int t = 0;
  int round = 0;
  bool guidance_applied = false;
  bool renoised = false;
};
using StepObserver = std::function<void(const StepEvent&)>;

// Guided ancestral sampling: reverse steps with a gradient correction toward
// the prior video, per-timestep renoising rounds, and guidance stopped for
// t <= ceil(early_stop_fraction * T). Returns the final clean sample, same
// shape as the prior.
Video guided_sample(const Denoiser& denoiser, const PriorVideo& prior,
                    const ConditionBundle& cond, const GuidanceConfig& config,
                    const NoiseSchedule& schedule, uint64_t seed,
                    const StepObserver& observer = {});

// Masked completion of a single image: the F=1 case of guided_sample.
Image inpaint_image(const Image& image, const Mask& mask,
                    const Denoiser& denoiser, const ConditionBundle& cond,
                    const GuidanceConfig& config, const NoiseSchedule& schedule,
                    uint64_t seed);

}  // namespace journey
