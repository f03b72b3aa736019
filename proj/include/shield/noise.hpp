#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "shield/errors.hpp"

namespace shield {

// Marginal q(x_t | x_0) = N(alpha(t) x_0, sigma2(t) I) for the forward
// diffusion. alpha/sigma2 are closed-form per schedule; endpoint identities
// alpha(0) = 1, sigma2(0) = 0 must hold bit-exactly.
struct MarginalCoeffs {
    double alpha;
    double sigma2;
};

class NoiseSchedule {
  public:
    virtual ~NoiseSchedule() = default;

    virtual double g(double t) const = 0;       // diffusion coefficient
    virtual double g2(double t) const = 0;      // g(t)^2 without the sqrt round-trip
    virtual MarginalCoeffs marginal(double t) const = 0;
    virtual std::string name() const = 0;

    double horizon() const { return T_; }

  protected:
    explicit NoiseSchedule(double T) : T_(T) {
        if (!(T > 0.0)) throw ValidationError("noise schedule horizon must be positive");
    }

    void check_time(double t) const {
        if (t < 0.0 || t > T_) throw TimeOutOfRange(t, T_);
    }

    double T_;
};

// variance-preserving: beta(t) = beta_min + (beta_max - beta_min) t / T,
// B(t) = int_0^t beta, alpha = exp(-B/2), sigma2 = 1 - exp(-B) = -expm1(-B)
class VpSchedule final : public NoiseSchedule {
  public:
    VpSchedule(double beta_min, double beta_max, double T)
        : NoiseSchedule(T), bmin_(beta_min), bmax_(beta_max) {
        if (!(beta_min > 0.0) || !(beta_max >= beta_min))
            throw ValidationError("vp schedule requires 0 < beta_min <= beta_max");
    }

    double beta(double t) const { return bmin_ + (bmax_ - bmin_) * t / T_; }

    double beta_integral(double t) const {
        return bmin_ * t + (bmax_ - bmin_) * t * t / (2.0 * T_);
    }

    double g(double t) const override {
        check_time(t);
        return std::sqrt(beta(t));
    }

    double g2(double t) const override {
        check_time(t);
        return beta(t);
    }

    MarginalCoeffs marginal(double t) const override {
        check_time(t);
        if (t == 0.0) return {1.0, 0.0};
        double B = beta_integral(t);
        return {std::exp(-0.5 * B), -std::expm1(-B)};
    }

    std::string name() const override { return "vp"; }

  private:
    double bmin_, bmax_;
};

// variance-exploding: g(t) = g_min r^{t/T}, alpha = 1,
// sigma2 = g_min^2 T / (2 ln r) * expm1(2 t ln r / T)
class VeSchedule final : public NoiseSchedule {
  public:
    VeSchedule(double g_min, double ratio, double T)
        : NoiseSchedule(T), gmin_(g_min), r_(ratio) {
        if (!(g_min > 0.0) || !(ratio > 1.0))
            throw ValidationError("ve schedule requires g_min > 0 and ratio > 1");
    }

    double g(double t) const override {
        check_time(t);
        return gmin_ * std::pow(r_, t / T_);
    }

    double g2(double t) const override {
        double v = g(t);
        return v * v;
    }

    MarginalCoeffs marginal(double t) const override {
        check_time(t);
        if (t == 0.0) return {1.0, 0.0};
        double lr = std::log(r_);
        double s2 = gmin_ * gmin_ * T_ / (2.0 * lr) * std::expm1(2.0 * t * lr / T_);
        return {1.0, s2};
    }

    std::string name() const override { return "ve"; }

  private:
    double gmin_, r_;
};

// constant diffusion: g(t) = g0, alpha = 1, sigma2 = g0^2 t
class ConstantGSchedule final : public NoiseSchedule {
  public:
    ConstantGSchedule(double g0, double T) : NoiseSchedule(T), g0_(g0) {
        if (!(g0 > 0.0)) throw ValidationError("constant schedule requires g0 > 0");
    }

    double g(double t) const override {
        check_time(t);
        return g0_;
    }

    double g2(double t) const override {
        check_time(t);
        return g0_ * g0_;
    }

    MarginalCoeffs marginal(double t) const override {
        check_time(t);
        if (t == 0.0) return {1.0, 0.0};
        return {1.0, g0_ * g0_ * t};
    }

    std::string name() const override { return "constant"; }

  private:
    double g0_;
};

} // namespace shield
