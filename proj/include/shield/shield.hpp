#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "shield/barrier.hpp"
#include "shield/errors.hpp"
#include "shield/qp.hpp"
#include "shield/schedule.hpp"

namespace shield {

// Class-K damping of the barrier decay. Linear is the default gamma(y) =
// alpha*y. CapTracking adds a bounded term kappa*min(1, y/y0) on top of a
// linear part whose slope is the exponential tube rate; it lets the filter
// hold the state a fixed fraction inside a deep tube instead of surfing the
// tube wall, which keeps the discrete ride off the -1e-6 audit floor on
// long, strongly curved runs. Constants are derived per run (see
// derive_cap_tracking in sampler.hpp).
enum class GammaKind { Linear, CapTracking };

struct GammaFn {
    GammaKind kind = GammaKind::Linear;
    double slope = 0.5;
    double kappa = 0.0;
    double y0 = 1e-4;

    double operator()(double y) const {
        double v = slope * y;
        if (kind == GammaKind::CapTracking) v += kappa * std::min(1.0, y / y0);
        return v;
    }

    // steepest local slope, for the discrete stability check
    double max_slope() const {
        return kind == GammaKind::CapTracking ? slope + kappa / y0 : slope;
    }
};

struct ShieldConfig {
    double T = 1.0;
    int K = 200;
    double alpha = 0.5; // linear gamma slope
    ConstrictionSchedule schedule = ConstrictionSchedule::linear();
    double c = 0.1;          // tube margin
    bool stochastic = false; // noise mode: Euler-Maruyama vs probability flow
    uint64_t seed = 7;
    QpSolver solver = QpSolver::Auto;

    GammaKind gamma_kind = GammaKind::Linear;
    double gamma_q = 0.75;   // cap-tracking: target depth fraction inside the tube
    double gamma_y0 = 1e-4;  // cap-tracking: width of the saturating term

    double dt() const { return T / K; }

    void validate() const {
        if (!(T > 0.0)) throw ValidationError("horizon T must be positive");
        if (K < 1) throw ValidationError("step count K must be >= 1");
        if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
        if (!(alpha * dt() < 1.0))
            throw ValidationError("alpha * dt must be < 1 for a stable contraction");
        if (c < 0.0) throw ValidationError("margin c must be nonnegative");
        if (gamma_kind == GammaKind::CapTracking) {
            if (!(gamma_q > 0.0 && gamma_q < 1.0))
                throw ValidationError("cap-tracking q must lie in (0,1)");
            if (!(gamma_y0 > 0.0)) throw ValidationError("cap-tracking y0 must be positive");
            if (schedule.kind() != ScheduleKind::Exponential)
                throw ValidationError("cap-tracking gamma requires the exponential schedule");
        }
    }
};

// Normal form of the discrete safety condition at one row, divided by dt:
// the constraint on u is a.u <= b with a = grad and
// b = gamma(h_tilde) - grad.f + grad.d_noise/dt - eps_dt.
double assemble_rhs(double gamma_value, const Vec& grad, const Vec& f,
                    const Vec& d_noise, double eps_dt, double dt);

// the linear-gamma convenience form: gamma_value = alpha * h_tilde
std::pair<Vec, double> assemble_constraint(double h_tilde, const Vec& grad, const Vec& f,
                                           const Vec& d_noise, double eps_dt, double alpha,
                                           double dt);

// Projects x onto the (possibly relaxed) safe set {h_r + eps_r >= 0 for all
// rows}: closed form per row where the barrier provides one, otherwise
// bisection along the row gradient to |h_r + eps_r| <= 1e-8, with a final
// snap to the feasible side. Multi-row coupling is handled by repeated
// passes.
Vec projection_step(const Barrier& bar, Vec x, const std::vector<double>& eps);

} // namespace shield
