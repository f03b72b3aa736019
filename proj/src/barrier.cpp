#include "shield/barrier.hpp"

#include <algorithm>
#include <cmath>

namespace shield {

// ---------------------------------------------------------------- Halfspace

Halfspace::Halfspace(Vec w, double o) : w_(std::move(w)), o_(o) {
    wn2_ = w_.squaredNorm();
    if (!(wn2_ > 0.0)) throw ValidationError("halfspace normal must be nonzero");
}

void Halfspace::eval(const Vec& x, Eigen::Ref<Vec> h) const {
    check_dim(x);
    h[0] = w_.dot(x) - o_;
}

void Halfspace::grad(const Vec& x, int, Vec& g) const {
    check_dim(x);
    g = w_;
}

bool Halfspace::project_row(Vec& x, int, double eps) const {
    double h = w_.dot(x) - o_;
    if (h + eps < 0.0) x -= (h + eps) / wn2_ * w_;
    return true;
}

// --------------------------------------------------------------------- Ball

Ball::Ball(Vec center, double r) : c_(std::move(center)), r_(r) {
    if (!(r > 0.0)) throw ValidationError("ball radius must be positive");
}

void Ball::eval(const Vec& x, Eigen::Ref<Vec> h) const {
    check_dim(x);
    h[0] = r_ * r_ - (x - c_).squaredNorm();
}

void Ball::grad(const Vec& x, int, Vec& g) const {
    check_dim(x);
    g = -2.0 * (x - c_);
}

bool Ball::project_row(Vec& x, int, double eps) const {
    double d2 = (x - c_).squaredNorm();
    double rad2 = r_ * r_ + eps;
    if (d2 > rad2) x = c_ + std::sqrt(rad2 / d2) * (x - c_);
    return true;
}

// ---------------------------------------------------------------------- Box

Box::Box(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() != hi_.size()) throw ValidationError("box bounds must have equal length");
    if (lo_.size() == 0) throw ValidationError("box must have at least one coordinate");
    for (int i = 0; i < lo_.size(); ++i)
        if (!(lo_[i] < hi_[i])) throw ValidationError("box needs lo < hi in every coordinate");
}

void Box::eval(const Vec& x, Eigen::Ref<Vec> h) const {
    check_dim(x);
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < lo_.size(); ++i)
        m = std::min(m, std::min(x[i] - lo_[i], hi_[i] - x[i]));
    h[0] = m;
}

void Box::grad(const Vec& x, int, Vec& g) const {
    check_dim(x);
    g.setZero(dim());
    int best = 0;
    bool lower = true;
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < lo_.size(); ++i) {
        if (x[i] - lo_[i] < m) { m = x[i] - lo_[i]; best = i; lower = true; }
        if (hi_[i] - x[i] < m) { m = hi_[i] - x[i]; best = i; lower = false; }
    }
    g[best] = lower ? 1.0 : -1.0;
}

double Box::h_sup() const {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < lo_.size(); ++i) m = std::min(m, 0.5 * (hi_[i] - lo_[i]));
    return m;
}

bool Box::project_row(Vec& x, int, double eps) const {
    for (int i = 0; i < lo_.size(); ++i)
        x[i] = std::clamp(x[i], lo_[i] - eps, hi_[i] + eps);
    return true;
}

// ---------------------------------------------------- PhysicsResidual

PhysicsResidual::PhysicsResidual(LorenzParams p, double dl, int L, double e)
    : p_(p), dl_(dl), e_(e), L_(L) {
    if (L < 1) throw ValidationError("physics residual needs at least one segment");
    if (!(dl > 0.0)) throw ValidationError("physics residual step must be positive");
    if (!(e > 0.0)) throw ValidationError("physics residual tolerance must be positive");
}

void PhysicsResidual::eval(const Vec& x, Eigen::Ref<Vec> h) const {
    check_dim(x);
    double acc = 0.0;
    for (int l = 0; l < L_; ++l) {
        Eigen::Vector3d z = x.segment<3>(3 * l);
        Eigen::Vector3d zn = x.segment<3>(3 * (l + 1));
        acc += ((zn - z) / dl_ - lorenz_field(z, p_)).squaredNorm();
    }
    h[0] = e_ - acc / L_;
}

void PhysicsResidual::grad(const Vec& x, int, Vec& g) const {
    check_dim(x);
    g.setZero(dim());
    // r_l couples z^l and z^{l+1}: d h / d z^j = -(2/L)(r_{j-1}/dl - r_j/dl - J(z^j)^T r_j)
    Eigen::Vector3d r_prev = Eigen::Vector3d::Zero();
    for (int j = 0; j <= L_; ++j) {
        Eigen::Vector3d z = x.segment<3>(3 * j);
        Eigen::Vector3d r_cur = Eigen::Vector3d::Zero();
        if (j < L_) {
            Eigen::Vector3d zn = x.segment<3>(3 * (j + 1));
            r_cur = (zn - z) / dl_ - lorenz_field(z, p_);
        }
        Eigen::Vector3d contrib = r_prev / dl_ - r_cur / dl_;
        if (j < L_) contrib -= lorenz_jacobian(z, p_).transpose() * r_cur;
        g.segment<3>(3 * j) = -2.0 / L_ * contrib;
        r_prev = r_cur;
    }
}

// ----------------------------------------------------------- PixelPatch

PixelPatch::PixelPatch(int img_h, int img_w, int row0, int col0, int height, int width,
                       std::array<double, 3> target, double e)
    : img_h_(img_h), img_w_(img_w), target_(target), e_(e) {
    if (img_h < 1 || img_w < 1) throw ValidationError("pixel patch image must be nonempty");
    if (height < 1 || width < 1) throw ValidationError("pixel patch region must be nonempty");
    if (row0 < 0 || col0 < 0 || row0 + height > img_h || col0 + width > img_w)
        throw ValidationError("pixel patch region must lie inside the image");
    if (!(e > 0.0)) throw ValidationError("pixel patch tolerance must be positive");
    for (double c : target)
        if (c < -1.0 || c > 1.0) throw ValidationError("pixel patch target must be in [-1,1]");

    // ramp band: 5% of each region dimension, at least one pixel per axis
    int band_h = std::max(1, static_cast<int>(std::ceil(0.05 * height)));
    int band_w = std::max(1, static_cast<int>(std::ceil(0.05 * width)));
    for (int i = row0; i < row0 + height; ++i) {
        for (int j = col0; j < col0 + width; ++j) {
            int di = std::min(i - row0, row0 + height - 1 - i) + 1;
            int dj = std::min(j - col0, col0 + width - 1 - j) + 1;
            double v = std::min(std::min(1.0, static_cast<double>(di) / (band_h + 1)),
                                std::min(1.0, static_cast<double>(dj) / (band_w + 1)));
            int base = (i * img_w_ + j) * 3;
            pix_.push_back({base, v});
            supports_.push_back({base, base + 1, base + 2});
        }
    }
}

void PixelPatch::eval(const Vec& x, Eigen::Ref<Vec> h) const {
    check_dim(x);
    for (size_t p = 0; p < pix_.size(); ++p) {
        double d2 = 0.0;
        for (int c = 0; c < 3; ++c) {
            double d = x[pix_[p].base + c] - target_[c];
            d2 += d * d;
        }
        h[static_cast<int>(p)] = e_ - pix_[p].v * d2;
    }
}

void PixelPatch::grad(const Vec& x, int row, Vec& g) const {
    check_dim(x);
    g.setZero(dim());
    const Pixel& p = pix_[row];
    for (int c = 0; c < 3; ++c) g[p.base + c] = -2.0 * p.v * (x[p.base + c] - target_[c]);
}

bool PixelPatch::project_row(Vec& x, int row, double eps) const {
    const Pixel& p = pix_[row];
    double d2 = 0.0;
    for (int c = 0; c < 3; ++c) {
        double d = x[p.base + c] - target_[c];
        d2 += d * d;
    }
    double cap = (e_ + eps) / p.v;
    if (d2 > cap) {
        double s = std::sqrt(cap / d2);
        for (int c = 0; c < 3; ++c) x[p.base + c] = target_[c] + s * (x[p.base + c] - target_[c]);
    }
    return true;
}

// ---------------------------------------------------------- ColorRegion

ColorRegion::ColorRegion(int img_h, int img_w, int i_min, int i_max,
                         std::array<double, 3> target, double v_min, double v_max, double e)
    : img_h_(img_h), img_w_(img_w), target_(target), e_(e) {
    if (img_h < 1 || img_w < 1) throw ValidationError("color region image must be nonempty");
    if (i_min < 0 || i_max < i_min || i_max >= img_h)
        throw ValidationError("color region rows must satisfy 0 <= i_min <= i_max < height");
    if (v_min < 0.0 || v_max < 0.0 || (v_min == 0.0 && v_max == 0.0))
        throw ValidationError("color region weights must be nonnegative and not both zero");
    if (!(e > 0.0)) throw ValidationError("color region tolerance must be positive");

    for (int i = i_min; i <= i_max; ++i) {
        double frac = i_max > i_min ? static_cast<double>(i - i_min) / (i_max - i_min) : 0.0;
        double v = v_min + (v_max - v_min) * frac;
        if (v <= 0.0) continue; // weight-zero row: no constraint
        for (int j = 0; j < img_w; ++j) {
            int base = (i * img_w_ + j) * 3;
            pix_.push_back({base, v});
            supports_.push_back({base, base + 1, base + 2});
        }
    }
}

void ColorRegion::eval(const Vec& x, Eigen::Ref<Vec> h) const {
    check_dim(x);
    for (size_t p = 0; p < pix_.size(); ++p) {
        double d2 = 0.0;
        for (int c = 0; c < 3; ++c) {
            double d = x[pix_[p].base + c] - target_[c];
            d2 += d * d;
        }
        h[static_cast<int>(p)] = e_ - pix_[p].v * d2;
    }
}

void ColorRegion::grad(const Vec& x, int row, Vec& g) const {
    check_dim(x);
    g.setZero(dim());
    const Pixel& p = pix_[row];
    for (int c = 0; c < 3; ++c) g[p.base + c] = -2.0 * p.v * (x[p.base + c] - target_[c]);
}

bool ColorRegion::project_row(Vec& x, int row, double eps) const {
    const Pixel& p = pix_[row];
    double d2 = 0.0;
    for (int c = 0; c < 3; ++c) {
        double d = x[p.base + c] - target_[c];
        d2 += d * d;
    }
    double cap = (e_ + eps) / p.v;
    if (d2 > cap) {
        double s = std::sqrt(cap / d2);
        for (int c = 0; c < 3; ++c) x[p.base + c] = target_[c] + s * (x[p.base + c] - target_[c]);
    }
    return true;
}

// ----------------------------------------------------------- Smoothness

Smoothness::Smoothness(int S, int d_a, double ds, double e)
    : S_(S), da_(d_a), ds_(ds), e_(e) {
    if (S < 2) throw ValidationError("smoothness needs at least two actions");
    if (d_a < 1) throw ValidationError("smoothness action dimension must be positive");
    if (!(ds > 0.0)) throw ValidationError("smoothness step must be positive");
    if (!(e > 0.0)) throw ValidationError("smoothness tolerance must be positive");
}

void Smoothness::eval(const Vec& x, Eigen::Ref<Vec> h) const {
    check_dim(x);
    double acc = 0.0;
    for (int s = 0; s + 1 < S_; ++s)
        acc += (x.segment(da_ * (s + 1), da_) - x.segment(da_ * s, da_)).squaredNorm();
    h[0] = e_ - acc / (S_ * ds_);
}

void Smoothness::grad(const Vec& x, int, Vec& g) const {
    check_dim(x);
    g.setZero(dim());
    // d h / d a_j = -(2/(S ds)) (d_{j-1} - d_j), d_s = a_{s+1} - a_s
    for (int j = 0; j < S_; ++j) {
        Vec contrib = Vec::Zero(da_);
        if (j > 0) contrib += x.segment(da_ * j, da_) - x.segment(da_ * (j - 1), da_);
        if (j + 1 < S_) contrib -= x.segment(da_ * (j + 1), da_) - x.segment(da_ * j, da_);
        g.segment(da_ * j, da_) = -2.0 / (S_ * ds_) * contrib;
    }
}

// --------------------------------------------------------- Intersection

Intersection::Intersection(std::vector<std::shared_ptr<Barrier>> members)
    : members_(std::move(members)) {
    if (members_.empty()) throw ValidationError("intersection needs at least one member");
    dim_ = members_[0]->dim();
    for (size_t m = 0; m < members_.size(); ++m) {
        if (members_[m]->dim() != dim_)
            throw ValidationError("intersection members must share one state space");
        for (int r = 0; r < members_[m]->rows(); ++r) {
            row_member_.push_back(static_cast<int>(m));
            row_local_.push_back(r);
        }
    }
    total_rows_ = static_cast<int>(row_member_.size());
}

void Intersection::eval(const Vec& x, Eigen::Ref<Vec> h) const {
    check_dim(x);
    int off = 0;
    for (const auto& m : members_) {
        m->eval(x, h.segment(off, m->rows()));
        off += m->rows();
    }
}

void Intersection::grad(const Vec& x, int row, Vec& g) const {
    members_[row_member_[row]]->grad(x, row_local_[row], g);
}

const std::vector<int>* Intersection::support(int row) const {
    return members_[row_member_[row]]->support(row_local_[row]);
}

double Intersection::h_sup() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& b : members_) m = std::min(m, b->h_sup());
    return m;
}

bool Intersection::project_row(Vec& x, int row, double eps) const {
    return members_[row_member_[row]]->project_row(x, row_local_[row], eps);
}

// ----------------------------------------------------------- grad check

double grad_check(const Barrier& bar, const Vec& x, double step) {
    if (!(step > 0.0)) throw ValidationError("grad_check step must be positive");
    const int n = bar.dim(), R = bar.rows();

    Mat G(R, n);
    Vec g(n);
    for (int r = 0; r < R; ++r) {
        bar.grad(x, r, g);
        G.row(r) = g.transpose();
    }
    Vec denom = G.cwiseAbs().rowwise().maxCoeff().cwiseMax(1e-12);

    Vec xp = x, hp(R), hm(R);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        double xi = x[i];
        xp[i] = xi + step;
        bar.eval(xp, hp);
        xp[i] = xi - step;
        bar.eval(xp, hm);
        xp[i] = xi;
        for (int r = 0; r < R; ++r) {
            double fd = (hp[r] - hm[r]) / (2.0 * step);
            worst = std::max(worst, std::abs(fd - G(r, i)) / denom[r]);
        }
    }
    return worst;
}

} // namespace shield
