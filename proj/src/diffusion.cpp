#include "journey/diffusion.hpp"

#include <cmath>
#include <stdexcept>

#include "journey/kernels.hpp"

namespace journey {

namespace {

void require_same_shape(const Video& a, const Video& b, const char* what) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                a.shape_str() + " vs " + b.shape_str());
}

}  // namespace

NoiseSchedule make_schedule(int timesteps, double beta_start, double beta_end) {
  if (timesteps < 1)
    throw std::invalid_argument("make_schedule: timesteps must be >= 1");
  if (!(beta_start > 0.0) || !(beta_end < 1.0) || !(beta_start <= beta_end))
    throw std::invalid_argument(
        "make_schedule: need 0 < beta_start <= beta_end < 1");

  NoiseSchedule s;
  s.timesteps = timesteps;
  s.beta.resize(timesteps);
  s.alpha.resize(timesteps);
  s.alpha_bar.resize(timesteps);
  double prod = 1.0;
  for (int i = 0; i < timesteps; ++i) {
    const double b =
        timesteps == 1
            ? beta_start
            : beta_start + (beta_end - beta_start) * i / (timesteps - 1);
    s.beta[i] = b;
    s.alpha[i] = 1.0 - b;
    prod *= s.alpha[i];
    s.alpha_bar[i] = prod;
  }
  return s;
}

Video diffuse_step(const Video& x_prev, int t, const NoiseSchedule& schedule,
                   const Video& noise) {
  require_same_shape(x_prev, noise, "diffuse_step");
  const double b = schedule.beta_at(t);
  Video out(x_prev.frames, x_prev.height, x_prev.width, x_prev.channels);
  kernels::axpby(std::sqrt(1.0 - b), x_prev.data, std::sqrt(b), noise.data,
                 out.data);
  return out;
}

Video diffuse_to(const Video& x0, int t, const NoiseSchedule& schedule,
                 const Video& noise) {
  require_same_shape(x0, noise, "diffuse_to");
  const double ab = schedule.alpha_bar_at(t);
  Video out(x0.frames, x0.height, x0.width, x0.channels);
  kernels::axpby(std::sqrt(ab), x0.data, std::sqrt(1.0 - ab), noise.data,
                 out.data);
  return out;
}

Video estimate_x0(const Video& x_t, int t, const Video& eps_hat,
                  const NoiseSchedule& schedule) {
  require_same_shape(x_t, eps_hat, "estimate_x0");
  const double ab = schedule.alpha_bar_at(t);
  if (ab <= 0.0) throw std::domain_error("estimate_x0: alpha_bar_t is zero");
  const double inv = 1.0 / std::sqrt(ab);
  Video out(x_t.frames, x_t.height, x_t.width, x_t.channels);
  kernels::axpby(inv, x_t.data, -std::sqrt(1.0 - ab) * inv, eps_hat.data,
                 out.data);
  return out;
}

Video reverse_step(const Video& x_t, int t, const Video& eps_hat,
                   const NoiseSchedule& schedule, const Video& z) {
  require_same_shape(x_t, eps_hat, "reverse_step");
  const double a = schedule.alpha_at(t);
  const double b = schedule.beta_at(t);
  const double ab = schedule.alpha_bar_at(t);
  const double inv_sqrt_a = 1.0 / std::sqrt(a);
  const double eps_coef = -inv_sqrt_a * b / std::sqrt(1.0 - ab);
  Video out(x_t.frames, x_t.height, x_t.width, x_t.channels);
  if (t == 1) {
    kernels::axpby(inv_sqrt_a, x_t.data, eps_coef, eps_hat.data, out.data);
  } else {
    require_same_shape(x_t, z, "reverse_step");
    kernels::axpbypcz(inv_sqrt_a, x_t.data, eps_coef, eps_hat.data,
                      std::sqrt(b), z.data, out.data);
  }
  return out;
}

double loss_simple(const Video& eps_hat, const Video& eps) {
  require_same_shape(eps_hat, eps, "loss_simple");
  return kernels::sum_sq_diff(eps_hat.data, eps.data);
}

Video Denoiser::vjp(const Video&, int, const ConditionBundle&,
                    const Video&) const {
  throw std::logic_error("Denoiser: vjp not supported by this backend");
}

Video ancestral_sample(const Denoiser& denoiser, const VideoShape& shape,
                       const ConditionBundle& cond,
                       const NoiseSchedule& schedule, RandomSource& rng) {
  Video x(shape.frames, shape.height, shape.width, shape.channels);
  rng.fill_normal(x);
  Video z(shape.frames, shape.height, shape.width, shape.channels);
  for (int t = schedule.timesteps; t >= 1; --t) {
    const Video eps = denoiser.predict_eps(x, t, cond);
    if (t > 1) rng.fill_normal(z);
    x = reverse_step(x, t, eps, schedule, z);
  }
  return x;
}

}  // namespace journey
