#include "shield/shield.hpp"

#include <cmath>

namespace shield {

double assemble_rhs(double gamma_value, const Vec& grad, const Vec& f,
                    const Vec& d_noise, double eps_dt, double dt) {
    if (!(dt > 0.0)) throw ValidationError("assemble_rhs needs dt > 0");
    return gamma_value - grad.dot(f) + grad.dot(d_noise) / dt - eps_dt;
}

std::pair<Vec, double> assemble_constraint(double h_tilde, const Vec& grad, const Vec& f,
                                           const Vec& d_noise, double eps_dt, double alpha,
                                           double dt) {
    return {grad, assemble_rhs(alpha * h_tilde, grad, f, d_noise, eps_dt, dt)};
}

namespace {

double row_value(const Barrier& bar, const Vec& x, Vec& buf, int row, double eps) {
    bar.eval(x, buf);
    return buf[row] + eps;
}

// move x along the row gradient until h_row + eps crosses 0, then bisect to
// a feasible point within 1e-8 of the boundary
void bisect_row(const Barrier& bar, Vec& x, int row, double eps, Vec& buf) {
    Vec g(bar.dim());
    bar.grad(x, row, g);
    double gn2 = g.squaredNorm();
    if (!(gn2 > 0.0))
        throw GradientDegenerate("projection needs a nonzero gradient on a violated row");

    double h0 = row_value(bar, x, buf, row, eps);
    double step = -h0 / gn2; // first-order estimate of the crossing
    double lo = 0.0, hi = step;
    for (int i = 0; i < 200 && row_value(bar, x + hi * g, buf, row, eps) < 0.0; ++i) {
        lo = hi;
        hi *= 2.0;
    }
    if (row_value(bar, x + hi * g, buf, row, eps) < 0.0)
        throw RuntimeAbort("projection line search found no feasible point along the gradient");

    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        double v = row_value(bar, x + mid * g, buf, row, eps);
        if (v < 0.0) {
            lo = mid;
        } else {
            hi = mid;
            if (v <= 1e-8) break;
        }
    }
    x += hi * g; // hi side is feasible by construction
}

} // namespace

Vec projection_step(const Barrier& bar, Vec x, const std::vector<double>& eps) {
    const int R = bar.rows();
    Vec h(R), g(bar.dim());

    for (int pass = 0; pass < 100; ++pass) {
        bar.eval(x, h);
        int violated = -1;
        for (int r = 0; r < R; ++r) {
            if (h[r] + eps[r] < 0.0) { violated = r; break; }
        }
        if (violated < 0) return x;

        // fix every violated row once per pass
        for (int r = violated; r < R; ++r) {
            if (h[r] + eps[r] >= 0.0) continue;
            if (bar.project_row(x, r, eps[r])) {
                // closed form lands on the boundary up to rounding; snap the
                // stray ulp to the feasible side so h_tilde >= 0 holds exactly
                Vec hb(R);
                for (int polish = 0; polish < 4; ++polish) {
                    bar.eval(x, hb);
                    double v = hb[r] + eps[r];
                    if (v >= 0.0) break;
                    bar.grad(x, r, g);
                    double gn2 = g.squaredNorm();
                    if (!(gn2 > 0.0))
                        throw GradientDegenerate("projection polish hit a zero gradient");
                    x += (-v + 1e-15 * std::max(1.0, std::abs(eps[r]))) / gn2 * g;
                }
            } else {
                Vec buf(R);
                bisect_row(bar, x, r, eps[r], buf);
            }
            bar.eval(x, h); // row fixes can disturb earlier rows; re-read
        }
    }
    throw RuntimeAbort("projection did not reach the safe set in 100 passes");
}

} // namespace shield
