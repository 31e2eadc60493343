#include "journey/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "journey/kernels.hpp"

namespace journey {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct MarginalTerms {
  double sqrt_ab;                  // sqrt(abar_t)
  double one_minus_ab;             // 1 - abar_t
  std::vector<double> variance;    // v_k = abar_t sigma_k^2 + 1 - abar_t
  std::vector<double> gain;        // g_k = sqrt(abar_t) sigma_k^2 / v_k
  std::vector<double> log_resp;    // unnormalized log responsibilities
};

MarginalTerms marginal_terms(const Video& x_t, int t, const GmmPrior& prior,
                             const NoiseSchedule& schedule) {
  const double ab = schedule.alpha_bar_at(t);
  MarginalTerms terms;
  terms.sqrt_ab = std::sqrt(ab);
  terms.one_minus_ab = 1.0 - ab;
  const size_t dims = x_t.size();
  const size_t k = prior.components.size();
  terms.variance.resize(k);
  terms.gain.resize(k);
  terms.log_resp.resize(k);
  for (size_t i = 0; i < k; ++i) {
    const GmmComponent& comp = prior.components[i];
    if (!x_t.same_shape(comp.mean))
      throw std::invalid_argument("gmm: component mean shape " +
                                  comp.mean.shape_str() + " does not match " +
                                  x_t.shape_str());
    const double v = ab * comp.sigma * comp.sigma + terms.one_minus_ab;
    terms.variance[i] = v;
    terms.gain[i] = terms.sqrt_ab * comp.sigma * comp.sigma / v;
    if (comp.weight <= 0.0) {
      terms.log_resp[i] = kNegInf;
      continue;
    }
    const double dist2 =
        kernels::sum_sq_scaled_diff(x_t.data, terms.sqrt_ab, comp.mean.data);
    terms.log_resp[i] = std::log(comp.weight) -
                        0.5 * dims * std::log(2.0 * std::numbers::pi * v) -
                        dist2 / (2.0 * v);
  }
  return terms;
}

// Normalize log responsibilities; falls back to uniform when nothing is
// finite (all components underflowed).
std::vector<double> responsibilities(const std::vector<double>& log_resp,
                                     GmmEvalStats* stats) {
  const size_t k = log_resp.size();
  double mx = kNegInf;
  for (double lr : log_resp) mx = std::max(mx, lr);
  std::vector<double> r(k);
  if (!std::isfinite(mx)) {
    if (stats) stats->responsibility_underflow = true;
    std::fill(r.begin(), r.end(), 1.0 / static_cast<double>(k));
    return r;
  }
  double z = 0.0;
  for (size_t i = 0; i < k; ++i) {
    r[i] = std::exp(log_resp[i] - mx);
    z += r[i];
  }
  for (double& ri : r) ri /= z;
  return r;
}

}  // namespace

void validate_prior(const GmmPrior& prior) {
  if (prior.components.empty())
    throw std::invalid_argument("GmmPrior: no components");
  double total = 0.0;
  const Video& ref = prior.components.front().mean;
  for (const GmmComponent& c : prior.components) {
    if (c.weight < 0.0)
      throw std::invalid_argument("GmmPrior: negative component weight");
    if (c.sigma < 0.0)
      throw std::invalid_argument("GmmPrior: negative component sigma");
    if (!c.mean.same_shape(ref))
      throw std::invalid_argument("GmmPrior: component mean shapes differ");
    total += c.weight;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw std::invalid_argument("GmmPrior: weights sum to " +
                                std::to_string(total) + ", expected 1");
}

double gmm_log_marginal(const Video& x_t, int t, const GmmPrior& prior,
                        const NoiseSchedule& schedule) {
  if (prior.components.empty())
    throw std::invalid_argument("gmm_log_marginal: empty prior");
  const MarginalTerms terms = marginal_terms(x_t, t, prior, schedule);
  double mx = kNegInf;
  for (double lr : terms.log_resp) mx = std::max(mx, lr);
  if (!std::isfinite(mx)) return kNegInf;
  double z = 0.0;
  for (double lr : terms.log_resp) z += std::exp(lr - mx);
  return mx + std::log(z);
}

Video gmm_posterior_mean(const Video& x_t, int t, const GmmPrior& prior,
                         const NoiseSchedule& schedule, GmmEvalStats* stats) {
  if (prior.components.empty())
    throw std::invalid_argument("gmm_posterior_mean: empty prior");
  const MarginalTerms terms = marginal_terms(x_t, t, prior, schedule);
  const std::vector<double> r = responsibilities(terms.log_resp, stats);

  // E[x0|x_t] = (sum_k r_k g_k) x_t + sum_k r_k (1 - g_k sqrt_ab) mu_k
  Video out(x_t.frames, x_t.height, x_t.width, x_t.channels);
  double x_coef = 0.0;
  for (size_t i = 0; i < r.size(); ++i) {
    x_coef += r[i] * terms.gain[i];
    const double mu_coef = r[i] * (1.0 - terms.gain[i] * terms.sqrt_ab);
    if (mu_coef != 0.0)
      kernels::axpy_acc(mu_coef, prior.components[i].mean.data, out.data);
  }
  if (x_coef != 0.0) kernels::axpy_acc(x_coef, x_t.data, out.data);
  return out;
}

Video gmm_predict_eps(const Video& x_t, int t, const GmmPrior& prior,
                      const NoiseSchedule& schedule, GmmEvalStats* stats) {
  const double ab = schedule.alpha_bar_at(t);
  const Video mean = gmm_posterior_mean(x_t, t, prior, schedule, stats);
  Video out(x_t.frames, x_t.height, x_t.width, x_t.channels);
  const double inv = 1.0 / std::sqrt(1.0 - ab);
  kernels::axpby(inv, x_t.data, -std::sqrt(ab) * inv, mean.data, out.data);
  return out;
}

Video gmm_predict_eps_vjp(const Video& x_t, int t, const GmmPrior& prior,
                          const NoiseSchedule& schedule, const Video& v) {
  if (!x_t.same_shape(v))
    throw std::invalid_argument("gmm_predict_eps_vjp: shape mismatch");
  const MarginalTerms terms = marginal_terms(x_t, t, prior, schedule);
  const std::vector<double> r = responsibilities(terms.log_resp, nullptr);
  const size_t k = r.size();
  const double s = terms.sqrt_ab;

  // With m_k the component posterior mean and a_k = (s mu_k - x)/v_k the
  // component score, the transposed Jacobian of E[x0|x_t] applied to v is
  //   (sum_k r_k g_k) v + sum_k r_k (q_k - Q) a_k,
  // where q_k = m_k . v and Q = sum_k r_k q_k. Expanding a_k leaves a scalar
  // coefficient on x and one per component mean.
  const double d_x = kernels::dot(x_t.data, v.data);
  std::vector<double> q(k);
  double gain_sum = 0.0, q_mean = 0.0;
  for (size_t i = 0; i < k; ++i) {
    const double d_mu = kernels::dot(prior.components[i].mean.data, v.data);
    q[i] = terms.gain[i] * d_x + (1.0 - terms.gain[i] * s) * d_mu;
    gain_sum += r[i] * terms.gain[i];
    q_mean += r[i] * q[i];
  }

  Video jt_v(x_t.frames, x_t.height, x_t.width, x_t.channels);
  double x_coef = 0.0;
  for (size_t i = 0; i < k; ++i) {
    const double c = r[i] * (q[i] - q_mean) / terms.variance[i];
    x_coef -= c;
    if (c != 0.0)
      kernels::axpy_acc(s * c, prior.components[i].mean.data, jt_v.data);
  }
  if (x_coef != 0.0) kernels::axpy_acc(x_coef, x_t.data, jt_v.data);
  kernels::axpy_acc(gain_sum, v.data, jt_v.data);

  // eps_hat = (x - s E[x0|x]) / sqrt(1-ab)  =>  J^T v = (v - s Jt_E v)/sqrt(..)
  Video out(x_t.frames, x_t.height, x_t.width, x_t.channels);
  const double inv = 1.0 / std::sqrt(terms.one_minus_ab);
  kernels::axpby(inv, v.data, -s * inv, jt_v.data, out.data);
  return out;
}

GmmDenoiser::GmmDenoiser(GmmPrior prior, NoiseSchedule schedule)
    : prior_(std::move(prior)), schedule_(std::move(schedule)) {
  validate_prior(prior_);
}

Video GmmDenoiser::predict_eps(const Video& x_t, int t,
                               const ConditionBundle&) const {
  GmmEvalStats stats;
  Video out = gmm_predict_eps(x_t, t, prior_, schedule_, &stats);
  if (stats.responsibility_underflow) underflow_seen_ = true;
  return out;
}

Video GmmDenoiser::vjp(const Video& x_t, int t, const ConditionBundle&,
                       const Video& v) const {
  return gmm_predict_eps_vjp(x_t, t, prior_, schedule_, v);
}

GmmPrior condition_prior(const GmmPrior& prior, const ConditionBundle& cond,
                         const ConditionOptions& opts) {
  validate_prior(prior);
  std::map<int, Image> pins = opts.pinned_frames;
  if (cond.start_frame && !pins.count(0)) pins.emplace(0, *cond.start_frame);

  GmmPrior out = prior;
  std::vector<double> logw(out.components.size());
  for (size_t i = 0; i < out.components.size(); ++i) {
    GmmComponent& comp = out.components[i];
    logw[i] = comp.weight > 0.0 ? std::log(comp.weight) : kNegInf;
    for (const auto& [f, img] : pins) {
      if (f < 0 || f >= comp.mean.frames)
        throw std::invalid_argument("condition_prior: pinned frame index " +
                                    std::to_string(f) + " out of range");
      const Image current = frame_of(comp.mean, f);
      if (!current.same_shape(img))
        throw std::invalid_argument(
            "condition_prior: pinned frame shape mismatch");
      logw[i] -= kernels::sum_sq_diff(current.data, img.data) /
                 (2.0 * opts.match_softness);
    }
    if (cond.text && !comp.tag.empty()) {
      std::string text = *cond.text, tag = comp.tag;
      std::transform(text.begin(), text.end(), text.begin(), ::tolower);
      std::transform(tag.begin(), tag.end(), tag.begin(), ::tolower);
      if (text.find(tag) != std::string::npos)
        logw[i] += std::log1p(opts.text_boost);
    }
    for (const auto& [f, img] : pins) set_frame(comp.mean, f, img);
  }

  double mx = kNegInf;
  for (double lw : logw) mx = std::max(mx, lw);
  if (!std::isfinite(mx)) {
    for (GmmComponent& comp : out.components)
      comp.weight = 1.0 / static_cast<double>(out.components.size());
    return out;
  }
  double z = 0.0;
  for (size_t i = 0; i < logw.size(); ++i) {
    out.components[i].weight = std::exp(logw[i] - mx);
    z += out.components[i].weight;
  }
  for (GmmComponent& comp : out.components) comp.weight /= z;
  return out;
}

}  // namespace journey
