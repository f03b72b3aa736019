#include "shield/oracle.hpp"

#include <cmath>
#include <limits>

namespace shield {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

GaussianMixture::GaussianMixture(Mat means, Vec sds, Vec weights)
    : means_(std::move(means)), sds_(std::move(sds)), weights_(std::move(weights)) {
    const int m = static_cast<int>(means_.rows());
    if (m < 1) throw ValidationError("mixture needs at least one component");
    if (sds_.size() != m || weights_.size() != m)
        throw ValidationError("mixture weights/sds must match component count");
    if ((sds_.array() < 0.0).any()) throw ValidationError("mixture sds must be nonnegative");
    if ((weights_.array() <= 0.0).any()) throw ValidationError("mixture weights must be positive");
    weights_ /= weights_.sum();
    logw_ = weights_.array().log();
}

GaussianMixture GaussianMixture::dataset(Mat points) {
    const int m = static_cast<int>(points.rows());
    return GaussianMixture(std::move(points), Vec::Zero(m), Vec::Constant(m, 1.0));
}

// posterior responsibilities and score in one pass, log-sum-exp stabilized
Vec GaussianMixture::score(const NoiseSchedule& ns, const Vec& x, double t) const {
    if (x.size() != means_.cols())
        throw DimensionMismatch(dim(), static_cast<int>(x.size()));
    const MarginalCoeffs mc = ns.marginal(t);
    const int m = components();

    Vec logit(m), var(m);
    bool any_live = false;
    for (int i = 0; i < m; ++i) {
        double v = mc.alpha * mc.alpha * sds_[i] * sds_[i] + mc.sigma2;
        var[i] = v;
        if (v <= 0.0) {
            // zero-variance atom: density is a delta; only x exactly on the
            // atom would matter, and there the score is undefined
            if ((x - mc.alpha * means_.row(i).transpose()).squaredNorm() == 0.0)
                throw DegenerateDensity("score requested at a zero-variance mixture atom");
            logit[i] = kNegInf;
            continue;
        }
        double d2 = (x - mc.alpha * means_.row(i).transpose()).squaredNorm();
        logit[i] = logw_[i] - 0.5 * dim() * std::log(v) - 0.5 * d2 / v;
        any_live = true;
    }
    if (!any_live)
        throw DegenerateDensity("all mixture components have zero variance at t=" + std::to_string(t));

    double mx = logit.maxCoeff();
    Vec r = (logit.array() - mx).exp();
    r /= r.sum();

    Vec s = Vec::Zero(dim());
    for (int i = 0; i < m; ++i) {
        if (r[i] == 0.0) continue;
        s += r[i] / var[i] * (mc.alpha * means_.row(i).transpose() - x);
    }
    return s;
}

double GaussianMixture::log_density(const NoiseSchedule& ns, const Vec& x, double t) const {
    if (x.size() != means_.cols())
        throw DimensionMismatch(dim(), static_cast<int>(x.size()));
    const MarginalCoeffs mc = ns.marginal(t);
    const int m = components();
    const double log2pi = std::log(2.0 * M_PI);

    Vec logit(m);
    for (int i = 0; i < m; ++i) {
        double v = mc.alpha * mc.alpha * sds_[i] * sds_[i] + mc.sigma2;
        if (v <= 0.0) {
            logit[i] = kNegInf;
            continue;
        }
        double d2 = (x - mc.alpha * means_.row(i).transpose()).squaredNorm();
        logit[i] = logw_[i] - 0.5 * dim() * (log2pi + std::log(v)) - 0.5 * d2 / v;
    }
    double mx = logit.maxCoeff();
    if (mx == kNegInf)
        throw DegenerateDensity("all mixture components have zero variance at t=" + std::to_string(t));
    return mx + std::log((logit.array() - mx).exp().sum());
}

namespace {

// VP keeps a linear contraction term; VE/constant schedules have no forward
// drift so their reverse drift is purely the score term in either form
double linear_coef(const NoiseSchedule& ns, double t, DriftForm form) {
    if (dynamic_cast<const VpSchedule*>(&ns) == nullptr) return 0.0;
    return form == DriftForm::Literal ? 0.5 : 0.5 * ns.g2(t);
}

} // namespace

Vec reverse_drift(const GaussianMixture& mix, const NoiseSchedule& ns,
                  const Vec& x, double t, DriftForm form) {
    double g2 = ns.g2(t);
    return -linear_coef(ns, t, form) * x - g2 * mix.score(ns, x, t);
}

Vec probability_flow_drift(const GaussianMixture& mix, const NoiseSchedule& ns,
                           const Vec& x, double t, DriftForm form) {
    double g2 = ns.g2(t);
    return -linear_coef(ns, t, form) * x - 0.5 * g2 * mix.score(ns, x, t);
}

} // namespace shield
