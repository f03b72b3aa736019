#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "shield/errors.hpp"

namespace shield {

// Per-path tube radius. At the terminal draw (reverse time t = T) the state
// may violate the barrier by up to eps0 - c; the tube eps(t) shrinks to zero
// at t = 0 so the final sample satisfies h >= 0 with margin c.
inline double epsilon_init(double h_terminal, double c) {
    return std::max(0.0, -h_terminal) + c;
}

enum class ScheduleKind { Linear, Exponential, Polynomial };

// eps(t) = eps0 * s(t/T) with s(0) = 0 and s(1) = 1 bit-exactly; deriv is the
// matching analytic time derivative (used in the safety constraint so the
// tube motion itself never consumes safety margin).
class ConstrictionSchedule {
  public:
    static ConstrictionSchedule linear() { return ConstrictionSchedule(ScheduleKind::Linear, 0.0); }

    static ConstrictionSchedule exponential(double lambda = 2.0) {
        if (!(lambda > 0.0)) throw ValidationError("exponential schedule rate must be positive");
        return ConstrictionSchedule(ScheduleKind::Exponential, lambda);
    }

    static ConstrictionSchedule polynomial(double p) {
        if (!(p >= 1.0)) throw ValidationError("polynomial schedule power must be >= 1");
        return ConstrictionSchedule(ScheduleKind::Polynomial, p);
    }

    double eval(double eps0, double t, double T) const {
        check(t, T);
        double s = t / T;
        switch (kind_) {
            case ScheduleKind::Linear: return eps0 * s;
            case ScheduleKind::Exponential:
                // ratio first: expm1(p)/expm1(p) == 1 exactly, so eval(eps0, T, T) == eps0
                return eps0 * (std::expm1(param_ * s) / std::expm1(param_));
            case ScheduleKind::Polynomial: return eps0 * std::pow(s, param_);
        }
        return 0.0;
    }

    double deriv(double eps0, double t, double T) const {
        check(t, T);
        double s = t / T;
        switch (kind_) {
            case ScheduleKind::Linear: return eps0 / T;
            case ScheduleKind::Exponential:
                return eps0 * (param_ / T) * std::exp(param_ * s) / std::expm1(param_);
            case ScheduleKind::Polynomial:
                return eps0 * (param_ / T) * std::pow(s, param_ - 1.0);
        }
        return 0.0;
    }

    ScheduleKind kind() const { return kind_; }

    // exponential rate or polynomial power, depending on kind
    double param() const { return param_; }

    std::string name() const {
        switch (kind_) {
            case ScheduleKind::Linear: return "linear";
            case ScheduleKind::Exponential: return "exponential";
            case ScheduleKind::Polynomial: return "polynomial";
        }
        return "";
    }

  private:
    ConstrictionSchedule(ScheduleKind k, double p) : kind_(k), param_(p) {}

    static void check(double t, double T) {
        if (t < 0.0 || t > T) throw TimeOutOfRange(t, T);
    }

    ScheduleKind kind_;
    double param_;
};

} // namespace shield
