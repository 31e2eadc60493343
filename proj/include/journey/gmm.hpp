#pragma once

#include <map>
#include <string>
#include <vector>

#include "journey/diffusion.hpp"
#include "journey/tensor.hpp"

namespace journey {

// Isotropic Gaussian mixture over clean samples. sigma = 0 marks a delta
// component, which turns the mixture into a finite-dataset (empirical Bayes)
// prior.
struct GmmComponent {
  double weight = 1.0;
  Video mean;
  double sigma = 0.0;
  std::string tag;  // optional label used for text-conditioned reweighting
};

struct GmmPrior {
  std::vector<GmmComponent> components;
};

// Throws unless weights are nonnegative and sum to 1 within 1e-12, sigmas are
// nonnegative and all means share one shape.
void validate_prior(const GmmPrior& prior);

struct GmmEvalStats {
  bool responsibility_underflow = false;
};

// log p_t(x_t) where p_t is the marginal of x_t under the diffused prior:
// each component contributes N(sqrt(abar_t) mu_k, (abar_t sigma_k^2 +
// 1-abar_t) I), combined with log-sum-exp.
double gmm_log_marginal(const Video& x_t, int t, const GmmPrior& prior,
                        const NoiseSchedule& schedule);

// Exact posterior mean E[x0 | x_t] under the mixture prior.
Video gmm_posterior_mean(const Video& x_t, int t, const GmmPrior& prior,
                         const NoiseSchedule& schedule,
                         GmmEvalStats* stats = nullptr);

// Exact Bayes noise prediction:
// eps_hat = (x_t - sqrt(abar_t) E[x0|x_t]) / sqrt(1-abar_t).
// When every responsibility underflows the responsibilities fall back to
// uniform and stats->responsibility_underflow is set.
Video gmm_predict_eps(const Video& x_t, int t, const GmmPrior& prior,
                      const NoiseSchedule& schedule,
                      GmmEvalStats* stats = nullptr);

// J^T v for J = d eps_hat / d x_t, in closed form.
Video gmm_predict_eps_vjp(const Video& x_t, int t, const GmmPrior& prior,
                          const NoiseSchedule& schedule, const Video& v);

// Denoiser backed by the analytic mixture. Conditioning is baked into the
// prior ahead of time (see condition_prior); the bundle passed per call is
// ignored.
class GmmDenoiser final : public Denoiser {
 public:
  GmmDenoiser(GmmPrior prior, NoiseSchedule schedule);

  Video predict_eps(const Video& x_t, int t,
                    const ConditionBundle& cond) const override;
  bool has_vjp() const override { return true; }
  Video vjp(const Video& x_t, int t, const ConditionBundle& cond,
            const Video& v) const override;

  const GmmPrior& prior() const { return prior_; }
  bool saw_underflow() const { return underflow_seen_; }

 private:
  GmmPrior prior_;
  NoiseSchedule schedule_;
  mutable bool underflow_seen_ = false;
};

struct ConditionOptions {
  // Frames to pin exactly in every component mean (frame index -> content).
  std::map<int, Image> pinned_frames;
  // Per-dimension variance used when reweighting components by how well
  // their mean agrees with a pinned frame.
  double match_softness = 0.0025;  // (0.05)^2
  // Multiplier applied to components whose tag occurs in cond.text.
  double text_boost = 4.0;
};

// Specialize a prior to a condition bundle: pin cond.start_frame (frame 0)
// plus any frames in opts, reweight components by start-frame agreement, and
// boost components whose tag appears in the text prompt. Returns a valid prior
// with renormalized weights.
GmmPrior condition_prior(const GmmPrior& prior, const ConditionBundle& cond,
                         const ConditionOptions& opts = {});

}  // namespace journey
