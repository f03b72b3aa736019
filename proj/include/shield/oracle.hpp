#pragma once

#include <memory>
#include <vector>

#include "shield/errors.hpp"
#include "shield/noise.hpp"
#include "shield/types.hpp"

namespace shield {

// Exact-score stand-in for a learned model: an isotropic Gaussian mixture in
// data space. Component variances may be zero, which turns the mixture into
// an empirical dataset of delta masses (the noised marginal then matches what
// a perfectly-trained denoiser would see).
class GaussianMixture {
  public:
    // means: one component per row; sds: per-component isotropic sd (>= 0);
    // weights must be positive and are normalized here
    GaussianMixture(Mat means, Vec sds, Vec weights);

    // uniform-weight empirical dataset (all sds zero)
    static GaussianMixture dataset(Mat points);

    int dim() const { return static_cast<int>(means_.cols()); }
    int components() const { return static_cast<int>(means_.rows()); }

    // exact score of the forward-noised mixture at time t:
    // p_t = sum_i w_i N(alpha_t mu_i, (alpha_t^2 s_i^2 + sigma_t^2) I)
    Vec score(const NoiseSchedule& ns, const Vec& x, double t) const;

    // log p_t(x), used by the finite-difference cross-checks
    double log_density(const NoiseSchedule& ns, const Vec& x, double t) const;

    const Mat& means() const { return means_; }
    const Vec& sds() const { return sds_; }
    const Vec& weights() const { return weights_; }

  private:
    Mat means_;
    Vec sds_, weights_, logw_;
};

// The paper prints the reverse drift as -x/2 - g^2 score with the linear term
// unscaled; the standard VP reverse SDE scales it by beta(t). Both are
// supported; BetaScaled is the default used by experiments (Literal drifts
// the marginals off the data law and is kept for fidelity to the printed
// form).
enum class DriftForm { BetaScaled, Literal };

// drift of the reverse-time SDE dx = f dt + g dW-bar
Vec reverse_drift(const GaussianMixture& mix, const NoiseSchedule& ns,
                  const Vec& x, double t, DriftForm form = DriftForm::BetaScaled);

// drift of the probability-flow ODE sharing the same marginals (sampling
// noise 0; the score term carries a 1/2)
Vec probability_flow_drift(const GaussianMixture& mix, const NoiseSchedule& ns,
                           const Vec& x, double t, DriftForm form = DriftForm::BetaScaled);

// Bundles score model, noise schedule and drift choice into the f(x,t)
// consumed by the sampling loop.
struct Oracle {
    std::shared_ptr<GaussianMixture> mix;
    std::shared_ptr<NoiseSchedule> ns;
    DriftForm form = DriftForm::BetaScaled;
    bool probability_flow = false;

    Vec drift(const Vec& x, double t) const {
        if (!mix) return Vec::Zero(x.size()); // pure diffusion
        return probability_flow ? probability_flow_drift(*mix, *ns, x, t, form)
                                : reverse_drift(*mix, *ns, x, t, form);
    }

    // effective diffusion magnitude of the sampling process
    double g_eff(double t) const { return probability_flow ? 0.0 : ns->g(t); }
};

} // namespace shield
