#pragma once

#include <optional>
#include <string>
#include <vector>

#include "journey/random.hpp"
#include "journey/tensor.hpp"

namespace journey {

// Per-step variance schedule. Tables are stored for t = 1..T; accessors take
// the 1-based timestep.
struct NoiseSchedule {
  int timesteps = 0;
  std::vector<double> beta;       // beta_t in (0,1)
  std::vector<double> alpha;      // 1 - beta_t
  std::vector<double> alpha_bar;  // prod_{s<=t} alpha_s, strictly decreasing

  double beta_at(int t) const { return beta[check(t)]; }
  double alpha_at(int t) const { return alpha[check(t)]; }
  double alpha_bar_at(int t) const { return alpha_bar[check(t)]; }

 private:
  size_t check(int t) const {
    if (t < 1 || t > timesteps)
      throw std::out_of_range("timestep " + std::to_string(t) +
                              " outside [1," + std::to_string(timesteps) + "]");
    return static_cast<size_t>(t - 1);
  }
};

// Linear beta ramp from beta_start to beta_end over T steps.
NoiseSchedule make_schedule(int timesteps, double beta_start, double beta_end);

inline NoiseSchedule default_schedule() { return make_schedule(1000, 1e-4, 0.02); }

// One forward step: sqrt(1-beta_t) * x_prev + sqrt(beta_t) * noise.
Video diffuse_step(const Video& x_prev, int t, const NoiseSchedule& schedule,
                   const Video& noise);

// Jump to timestep t: sqrt(abar_t) * x0 + sqrt(1-abar_t) * noise.
Video diffuse_to(const Video& x0, int t, const NoiseSchedule& schedule,
                 const Video& noise);

// Invert the jump given a noise estimate:
// (x_t - sqrt(1-abar_t) * eps_hat) / sqrt(abar_t).
Video estimate_x0(const Video& x_t, int t, const Video& eps_hat,
                  const NoiseSchedule& schedule);

// Ancestral reverse step with sigma_t^2 = beta_t; the noise term is
// suppressed at t = 1.
Video reverse_step(const Video& x_t, int t, const Video& eps_hat,
                   const NoiseSchedule& schedule, const Video& z);

// Sum of squared differences between predicted and true noise.
double loss_simple(const Video& eps_hat, const Video& eps);

// Optional start-frame / text conditioning passed through to denoisers.
struct ConditionBundle {
  std::optional<Image> start_frame;
  std::optional<std::string> text;
};

// Noise predictor abstraction. vjp computes J^T v for J = d eps / d x_t when
// the implementation supports it.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Video predict_eps(const Video& x_t, int t,
                            const ConditionBundle& cond) const = 0;
  virtual bool has_vjp() const { return false; }
  virtual Video vjp(const Video& x_t, int t, const ConditionBundle& cond,
                    const Video& v) const;
};

struct VideoShape {
  int frames = 1, height = 1, width = 1, channels = 1;
};

// Plain T-step ancestral chain from seeded unit-Gaussian noise.
Video ancestral_sample(const Denoiser& denoiser, const VideoShape& shape,
                       const ConditionBundle& cond,
                       const NoiseSchedule& schedule, RandomSource& rng);

}  // namespace journey
