#include "journey/guided.hpp"

#include <cmath>
#include <stdexcept>

#include "journey/kernels.hpp"
#include "journey/random.hpp"

namespace journey {

void PriorVideo::validate(bool require_full_end_masks) const {
  if (!video.same_shape(mask))
    throw std::invalid_argument("prior video: video/mask shape mismatch");
  const size_t n = video.size();
  for (size_t i = 0; i < n; ++i) {
    const double m = mask.data[i];
    if (m != 0.0 && m != 1.0)
      throw std::invalid_argument("prior video: mask is not binary");
    if (m == 0.0 && video.data[i] != 0.0)
      throw std::invalid_argument("prior video: content outside the mask");
    if (!std::isfinite(video.data[i]))
      throw std::invalid_argument("prior video: non-finite frame entry");
  }
  if (require_full_end_masks) {
    const size_t frame = n / video.frames;
    for (size_t i = 0; i < frame; ++i)
      if (mask.data[i] != 1.0 || mask.data[n - frame + i] != 1.0)
        throw std::invalid_argument(
            "prior video: end frames must be fully observed");
  }
}

void GuidanceConfig::validate() const {
  if (!(guidance_weight >= 0.0))
    throw std::invalid_argument("guidance: negative weight");
  if (early_stop_fraction < 0.0 || early_stop_fraction >= 1.0)
    throw std::invalid_argument("guidance: early_stop_fraction outside [0,1)");
  if (renoise_rounds < 0)
    throw std::invalid_argument("guidance: negative renoise rounds");
  if (pad_count < 0) throw std::invalid_argument("guidance: negative padding");
}

int GuidanceConfig::cutoff_step(int timesteps) const {
  return static_cast<int>(std::ceil(early_stop_fraction * timesteps));
}

PriorVideo build_prior(const Image& input_view,
                       const std::vector<RenderOutput>& rendered,
                       const Image& end_view) {
  if (!input_view.same_shape(end_view))
    throw std::invalid_argument("build_prior: end view shapes differ");
  const int frames = static_cast<int>(rendered.size()) + 2;
  PriorVideo prior;
  prior.video = Video(frames, input_view.height, input_view.width,
                      input_view.channels);
  prior.mask = Video(frames, input_view.height, input_view.width,
                     input_view.channels);

  set_frame(prior.video, 0, input_view);
  set_frame(prior.video, frames - 1, end_view);
  for (int i = 0; i < frames; ++i) {
    if (i == 0 || i == frames - 1) {
      for (int y = 0; y < input_view.height; ++y)
        for (int x = 0; x < input_view.width; ++x)
          for (int c = 0; c < input_view.channels; ++c)
            prior.mask.at(i, y, x, c) = 1.0;
      continue;
    }
    const RenderOutput& r = rendered[i - 1];
    if (!r.image.same_shape(input_view))
      throw std::invalid_argument("build_prior: rendered frame " +
                                  std::to_string(i - 1) + " shape mismatch");
    set_frame(prior.video, i, r.image);
    for (int y = 0; y < input_view.height; ++y)
      for (int x = 0; x < input_view.width; ++x) {
        const double m = r.mask.at(y, x);
        for (int c = 0; c < input_view.channels; ++c)
          prior.mask.at(i, y, x, c) = m;
      }
  }
  prior.validate();
  return prior;
}

Video pad_video(const Video& v, int pad_count) {
  if (pad_count < 0) throw std::invalid_argument("pad_video: negative count");
  if (pad_count == 0) return v;
  Video out(v.frames + 2 * pad_count, v.height, v.width, v.channels);
  const size_t frame = v.size() / v.frames;
  for (int f = 0; f < out.frames; ++f) {
    const int src = std::clamp(f - pad_count, 0, v.frames - 1);
    std::copy(v.data.begin() + src * frame, v.data.begin() + (src + 1) * frame,
              out.data.begin() + static_cast<size_t>(f) * frame);
  }
  return out;
}

Video unpad_video(const Video& v, int pad_count) {
  if (pad_count < 0) throw std::invalid_argument("unpad_video: negative count");
  if (pad_count == 0) return v;
  if (v.frames <= 2 * pad_count)
    throw std::invalid_argument("unpad_video: not enough frames to remove");
  Video out(v.frames - 2 * pad_count, v.height, v.width, v.channels);
  const size_t frame = v.size() / v.frames;
  std::copy(v.data.begin() + static_cast<size_t>(pad_count) * frame,
            v.data.begin() + static_cast<size_t>(pad_count + out.frames) * frame,
            out.data.begin());
  return out;
}

PriorVideo pad_views(const PriorVideo& prior, int pad_count) {
  PriorVideo out;
  out.video = pad_video(prior.video, pad_count);
  out.mask = pad_video(prior.mask, pad_count);
  return out;
}

PriorVideo unpad_views(const PriorVideo& prior, int pad_count) {
  PriorVideo out;
  out.video = unpad_video(prior.video, pad_count);
  out.mask = unpad_video(prior.mask, pad_count);
  return out;
}

Video guidance_grad(const Video& x_t, int t, const PriorVideo& prior,
                    const Denoiser& denoiser, const ConditionBundle& cond,
                    const NoiseSchedule& schedule, GradMode mode) {
  if (!x_t.same_shape(prior.video))
    throw std::invalid_argument("guidance_grad: latent/prior shape mismatch");
  if (mode == GradMode::exact_vjp && !denoiser.has_vjp())
    throw std::invalid_argument(
        "guidance_grad: exact-vjp requested but the denoiser has no vjp");

  const Video eps = denoiser.predict_eps(x_t, t, cond);
  const Video x0_hat = estimate_x0(x_t, t, eps, schedule);
  const double ab = schedule.alpha_bar_at(t);
  const double inv_sqrt_ab = 1.0 / std::sqrt(ab);

  // d/d x0_hat of the masked squared error (mask is binary).
  Video residual(x_t.frames, x_t.height, x_t.width, x_t.channels);
  kernels::masked_diff(2.0, prior.mask.data, x0_hat.data, prior.video.data,
                       residual.data);

  Video grad(x_t.frames, x_t.height, x_t.width, x_t.channels);
  if (mode == GradMode::stop_gradient) {
    // x0_hat depends on x_t as x_t / sqrt(abar) when eps is held fixed.
    kernels::axpby(inv_sqrt_ab, residual.data, 0.0, residual.data, grad.data);
    return grad;
  }
  const Video jt_u = denoiser.vjp(x_t, t, cond, residual);
  kernels::axpby(inv_sqrt_ab, residual.data,
                 -std::sqrt(1.0 - ab) * inv_sqrt_ab, jt_u.data, grad.data);
  return grad;
}

Video guided_sample(const Denoiser& denoiser, const PriorVideo& prior,
                    const ConditionBundle& cond, const GuidanceConfig& config,
                    const NoiseSchedule& schedule, uint64_t seed,
                    const StepObserver& observer) {
  prior.validate(false);
  config.validate();
  const Video& shape = prior.video;
  const int t_c = config.cutoff_step(schedule.timesteps);

  RandomSource rng(seed);
  Video x(shape.frames, shape.height, shape.width, shape.channels);
  rng.fill_normal(x);
  Video z(shape.frames, shape.height, shape.width, shape.channels);
  Video noise(shape.frames, shape.height, shape.width, shape.channels);

  for (int t = schedule.timesteps; t >= 1; --t) {
    const bool inject = t > t_c;
    const int rounds = inject ? config.renoise_rounds : 0;
    for (int round = 0; round <= rounds; ++round) {
      const Video eps = denoiser.predict_eps(x, t, cond);
      if (t > 1) rng.fill_normal(z);
      Video x_prev = reverse_step(x, t, eps, schedule, z);

      const bool apply = inject && config.guidance_weight != 0.0;
      if (apply) {
        const Video grad = guidance_grad(x, t, prior, denoiser, cond, schedule,
                                         config.grad_mode);
        kernels::axpby(1.0, x_prev.data, -config.guidance_weight, grad.data,
                       x_prev.data);
      }

      const bool renoise = round < rounds;
      if (observer) observer({t, round, apply, renoise});
      if (renoise) {
        rng.fill_normal(noise);
        x = diffuse_step(x_prev, t, schedule, noise);
      } else {
        x = std::move(x_prev);
      }
    }
    const double peak = kernels::max_abs(x.data);
    if (!std::isfinite(peak))
      throw std::runtime_error(
          "guided_sample: non-finite latent at timestep " + std::to_string(t) +
          " (max magnitude " + std::to_string(peak) + ")");
  }
  return x;
}

Image inpaint_image(const Image& image, const Mask& mask,
                    const Denoiser& denoiser, const ConditionBundle& cond,
                    const GuidanceConfig& config, const NoiseSchedule& schedule,
                    uint64_t seed) {
  if (image.height != mask.height || image.width != mask.width)
    throw std::invalid_argument("inpaint_image: image/mask sizes differ");
  PriorVideo prior;
  prior.video = Video(1, image.height, image.width, image.channels);
  prior.mask = Video(1, image.height, image.width, image.channels);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const double m = mask.at(y, x);
      if (m != 0.0 && m != 1.0)
        throw std::invalid_argument("inpaint_image: mask is not binary");
      for (int c = 0; c < image.channels; ++c) {
        prior.mask.at(0, y, x, c) = m;
        prior.video.at(0, y, x, c) = m * image.at(y, x, c);
      }
    }
  const Video out = guided_sample(denoiser, prior, cond, config, schedule, seed);
  return frame_of(out, 0);
}

}  // namespace journey
