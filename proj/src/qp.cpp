#include "shield/qp.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace shield {

void QPInstance::add_row(Vec a, double b, const std::vector<int>* support) {
    if (static_cast<int>(a.size()) != dim_)
        throw DimensionMismatch(dim_, static_cast<int>(a.size()));
    if (!a.allFinite() || !std::isfinite(b))
        throw ValidationError("qp row entries must be finite");
    if (a.isZero(0.0) && b >= 0.0) return;
    rows_.push_back({std::move(a), b, support});
}

namespace {

// single-row closed form on one row, accumulated into (u, lambda)
void solve_row(const QpRow& row, Vec& u, double& lambda) {
    double an2 = row.a.squaredNorm();
    double scale = std::min(0.0, row.b / an2);
    if (scale != 0.0) u += scale * row.a;
    lambda = std::max(0.0, -row.b / an2);
}

bool supports_disjoint(const QPInstance& qp) {
    std::unordered_set<int> seen;
    std::vector<int> derived;
    for (const auto& row : qp.rows()) {
        derived.clear();
        const std::vector<int>* sup = row.support;
        if (sup == nullptr) {
            for (int i = 0; i < row.a.size(); ++i)
                if (row.a[i] != 0.0) derived.push_back(i);
            sup = &derived;
        }
        for (int i : *sup)
            if (!seen.insert(i).second) return false;
    }
    return true;
}

} // namespace

QpResult solve_min_norm(const QPInstance& qp, QpSolver solver, int max_iterations, double tol) {
    const int n = qp.dim();
    const int m = static_cast<int>(qp.rows().size());

    QpResult res;
    res.u = Vec::Zero(n);
    res.lambda = Vec::Zero(m);
    if (m == 0) return res;

    for (const auto& row : qp.rows())
        if (row.a.isZero(0.0))
            throw GradientDegenerate("constraint row has zero gradient with b = " +
                                     std::to_string(row.b));

    // minimal intervention: every row slack at u = 0
    bool all_slack = true;
    for (const auto& row : qp.rows())
        if (row.b < 0.0) { all_slack = false; break; }
    if (all_slack) return res;

    bool separable = m == 1 || supports_disjoint(qp);
    if (solver == QpSolver::ClosedForm && !separable)
        throw ValidationError("closed-form solver requires a single row or disjoint supports");

    if (separable && solver != QpSolver::DualAscent) {
        for (int j = 0; j < m; ++j) solve_row(qp.rows()[j], res.u, res.lambda[j]);
        res.method = QpMethod::Closed;
        return res;
    }

    // Hildreth: dual problem min ½λᵀHλ + bᵀλ over λ >= 0, H = AAᵀ,
    // coordinate-wise exact minimization; recovers u = −Aᵀλ
    Mat H(m, m);
    Vec b(m);
    for (int i = 0; i < m; ++i) {
        b[i] = qp.rows()[i].b;
        for (int j = 0; j <= i; ++j) {
            H(i, j) = qp.rows()[i].a.dot(qp.rows()[j].a);
            H(j, i) = H(i, j);
        }
    }

    Vec lam = Vec::Zero(m);
    int it = 0;
    for (; it < max_iterations; ++it) {
        double delta = 0.0;
        for (int i = 0; i < m; ++i) {
            double grad_i = b[i] + H.row(i).dot(lam);
            double next = std::max(0.0, lam[i] - grad_i / H(i, i));
            delta = std::max(delta, std::abs(next - lam[i]));
            lam[i] = next;
        }
        if (delta < tol) break;
    }
    if (it == max_iterations)
        throw DualNonConvergence("dual ascent hit max iterations (" +
                                 std::to_string(max_iterations) + ")");

    for (int i = 0; i < m; ++i)
        if (lam[i] != 0.0) res.u -= lam[i] * qp.rows()[i].a;
    res.lambda = lam;
    res.method = QpMethod::Dual;
    res.iterations = it + 1;

    for (int i = 0; i < m; ++i) {
        double resid = qp.rows()[i].a.dot(res.u) - b[i];
        if (resid > 1e-8)
            throw DualNonConvergence("dual ascent converged to an infeasible point (residual " +
                                     std::to_string(resid) + ")");
    }
    return res;
}

} // namespace shield
