#pragma once

#include <array>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "shield/errors.hpp"
#include "shield/lorenz.hpp"
#include "shield/types.hpp"

namespace shield {

// A barrier exposes one or more scalar constraint rows h_i(x); the safe set
// is the intersection {h_i(x) >= 0 for all i}. Rows are never folded through
// a min: the sampler constrains each row separately so gradients stay smooth.
class Barrier {
  public:
    virtual ~Barrier() = default;

    virtual int dim() const = 0;
    virtual int rows() const = 0;

    // write all row values h_i(x) into h (resized by caller to rows())
    virtual void eval(const Vec& x, Eigen::Ref<Vec> h) const = 0;

    // dense gradient of row i, written into g (sized dim(), zero off-support)
    virtual void grad(const Vec& x, int row, Vec& g) const = 0;

    // coordinates row i depends on; nullptr means dense
    virtual const std::vector<int>* support(int row) const {
        (void)row;
        return nullptr;
    }

    // finite upper bound of attainable h, when one exists (needed by the
    // cap-tracking gamma which must know how much headroom the row has)
    virtual double h_sup() const { return std::numeric_limits<double>::infinity(); }

    // exact Euclidean projection of x onto {h_row >= -eps}, when closed-form;
    // returns false if no closed form exists (caller falls back to bisection)
    virtual bool project_row(Vec& x, int row, double eps) const {
        (void)x;
        (void)row;
        (void)eps;
        return false;
    }

    virtual std::string name() const = 0;

  protected:
    void check_dim(const Vec& x) const {
        if (static_cast<int>(x.size()) != dim())
            throw DimensionMismatch(dim(), static_cast<int>(x.size()));
    }
};

// h = w.x - o
class Halfspace final : public Barrier {
  public:
    Halfspace(Vec w, double o);

    int dim() const override { return static_cast<int>(w_.size()); }
    int rows() const override { return 1; }
    void eval(const Vec& x, Eigen::Ref<Vec> h) const override;
    void grad(const Vec& x, int row, Vec& g) const override;
    bool project_row(Vec& x, int row, double eps) const override;
    std::string name() const override { return "halfspace"; }

  private:
    Vec w_;
    double o_, wn2_;
};

// h = r^2 - |x - c|^2
class Ball final : public Barrier {
  public:
    Ball(Vec center, double r);

    int dim() const override { return static_cast<int>(c_.size()); }
    int rows() const override { return 1; }
    void eval(const Vec& x, Eigen::Ref<Vec> h) const override;
    void grad(const Vec& x, int row, Vec& g) const override;
    double h_sup() const override { return r_ * r_; }
    bool project_row(Vec& x, int row, double eps) const override;
    std::string name() const override { return "ball"; }

  private:
    Vec c_;
    double r_;
};

// h = min_i min(x_i - lo_i, hi_i - x_i); subgradient picks the first
// attaining index (lower face before upper face on ties)
class Box final : public Barrier {
  public:
    Box(Vec lo, Vec hi);

    int dim() const override { return static_cast<int>(lo_.size()); }
    int rows() const override { return 1; }
    void eval(const Vec& x, Eigen::Ref<Vec> h) const override;
    void grad(const Vec& x, int row, Vec& g) const override;
    double h_sup() const override;
    bool project_row(Vec& x, int row, double eps) const override;
    std::string name() const override { return "box"; }

  private:
    Vec lo_, hi_;
};

// x is a flattened trajectory (z^0 ... z^L, xyz-interleaved);
// h = e - (1/L) sum_l |r_l|^2 with r_l = (z^{l+1} - z^l)/dl - F(z^l),
// F the chaotic vector field above. Penalizes dynamics violations.
class PhysicsResidual final : public Barrier {
  public:
    PhysicsResidual(LorenzParams p, double dl, int L, double e);

    int dim() const override { return 3 * (L_ + 1); }
    int rows() const override { return 1; }
    void eval(const Vec& x, Eigen::Ref<Vec> h) const override;
    void grad(const Vec& x, int row, Vec& g) const override;
    double h_sup() const override { return e_; }
    std::string name() const override { return "physics_residual"; }

  private:
    LorenzParams p_;
    double dl_, e_;
    int L_;
};

// x is a flattened H x W x 3 image (row-major, channel-minor, values in
// [-1,1]). One row per in-region pixel p: h_p = e - v(p) |x_p - target|^2,
// where v ramps linearly from 0 at the region edge to 1 in the interior over
// a band of 5% of the region extent (at least one pixel).
class PixelPatch final : public Barrier {
  public:
    PixelPatch(int img_h, int img_w, int row0, int col0, int height, int width,
               std::array<double, 3> target, double e);

    int dim() const override { return img_h_ * img_w_ * 3; }
    int rows() const override { return static_cast<int>(pix_.size()); }
    void eval(const Vec& x, Eigen::Ref<Vec> h) const override;
    void grad(const Vec& x, int row, Vec& g) const override;
    const std::vector<int>* support(int row) const override { return &supports_[row]; }
    double h_sup() const override { return e_; }
    bool project_row(Vec& x, int row, double eps) const override;
    std::string name() const override { return "pixel_patch"; }

    double weight(int row) const { return pix_[row].v; }

  private:
    struct Pixel {
        int base; // index of channel 0 in the flat image
        double v;
    };

    int img_h_, img_w_;
    std::array<double, 3> target_;
    double e_;
    std::vector<Pixel> pix_;
    std::vector<std::vector<int>> supports_;
};

// Like PixelPatch but covers whole pixel rows i_min..i_max, with weight
// interpolating linearly from v_min at i_min to v_max at i_max.
class ColorRegion final : public Barrier {
  public:
    ColorRegion(int img_h, int img_w, int i_min, int i_max,
                std::array<double, 3> target, double v_min, double v_max, double e);

    int dim() const override { return img_h_ * img_w_ * 3; }
    int rows() const override { return static_cast<int>(pix_.size()); }
    void eval(const Vec& x, Eigen::Ref<Vec> h) const override;
    void grad(const Vec& x, int row, Vec& g) const override;
    const std::vector<int>* support(int row) const override { return &supports_[row]; }
    double h_sup() const override { return e_; }
    bool project_row(Vec& x, int row, double eps) const override;
    std::string name() const override { return "color_region"; }

  private:
    struct Pixel {
        int base;
        double v;
    };

    int img_h_, img_w_;
    std::array<double, 3> target_;
    double e_;
    std::vector<Pixel> pix_;
    std::vector<std::vector<int>> supports_;
};

// x is a flattened action sequence (a_0 ... a_{S-1}, each in R^{d_a});
// h = e - (1/(S ds)) sum_s |a_{s+1} - a_s|^2 penalizes jerky sequences.
class Smoothness final : public Barrier {
  public:
    Smoothness(int S, int d_a, double ds, double e);

    int dim() const override { return S_ * da_; }
    int rows() const override { return 1; }
    void eval(const Vec& x, Eigen::Ref<Vec> h) const override;
    void grad(const Vec& x, int row, Vec& g) const override;
    double h_sup() const override { return e_; }
    std::string name() const override { return "smoothness"; }

  private:
    int S_, da_;
    double ds_, e_;
};

// Concatenates the rows of several barriers over the same state space.
class Intersection final : public Barrier {
  public:
    explicit Intersection(std::vector<std::shared_ptr<Barrier>> members);

    int dim() const override { return dim_; }
    int rows() const override { return total_rows_; }
    void eval(const Vec& x, Eigen::Ref<Vec> h) const override;
    void grad(const Vec& x, int row, Vec& g) const override;
    const std::vector<int>* support(int row) const override;
    double h_sup() const override;
    bool project_row(Vec& x, int row, double eps) const override;
    std::string name() const override { return "intersection"; }

    int member_count() const { return static_cast<int>(members_.size()); }
    const Barrier& member(int i) const { return *members_[i]; }
    // member index owning a global row
    int member_of(int row) const { return row_member_[row]; }

  private:
    std::vector<std::shared_ptr<Barrier>> members_;
    std::vector<int> row_member_, row_local_;
    int dim_ = 0, total_rows_ = 0;
};

// Central finite difference of every row against the analytic gradient,
// per coordinate; returns the worst error relative to each row's gradient
// scale. Linear barriers should come out near rounding (<= 1e-9 at step
// 1e-6); smooth nonlinear ones within 1e-4 at step 1e-5.
double grad_check(const Barrier& bar, const Vec& x, double step);

} // namespace shield
