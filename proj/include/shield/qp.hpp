#pragma once

#include <string>
#include <vector>

#include "shield/errors.hpp"
#include "shield/types.hpp"

namespace shield {

// Minimum-norm control QP:  min ½|u|²  s.t.  a_j·u <= b_j for all rows.

enum class QpSolver { ClosedForm, DualAscent, Auto };

enum class QpMethod { None, Closed, Dual }; // what actually solved the step

inline const char* qp_method_name(QpMethod m) {
    switch (m) {
        case QpMethod::None: return "none";
        case QpMethod::Closed: return "closed";
        case QpMethod::Dual: return "dual";
    }
    return "";
}

struct QpRow {
    Vec a;
    double b;
    // indices of nonzero coordinates of a when the caller knows them
    // (barrier support sets); used to prove block-separability
    const std::vector<int>* support = nullptr;
};

class QPInstance {
  public:
    explicit QPInstance(int dim) : dim_(dim) {}

    // zero rows with b >= 0 are vacuous and dropped here; zero rows with
    // b < 0 are kept so the solver can fail loudly (GradientDegenerate)
    void add_row(Vec a, double b, const std::vector<int>* support = nullptr);

    int dim() const { return dim_; }
    const std::vector<QpRow>& rows() const { return rows_; }
    bool empty() const { return rows_.empty(); }

  private:
    int dim_;
    std::vector<QpRow> rows_;
};

struct QpResult {
    Vec u;
    Vec lambda; // one multiplier per instance row
    QpMethod method = QpMethod::None;
    int iterations = 0;
};

// Closed form for a single row (u* = min(0, b/|a|²)·a), per-row closed forms
// when supports are pairwise disjoint, Hildreth dual coordinate ascent
// otherwise. Auto picks the cheapest applicable; requesting ClosedForm on a
// coupled instance is a ValidationError.
QpResult solve_min_norm(const QPInstance& qp, QpSolver solver = QpSolver::Auto,
                        int max_iterations = 10000, double tol = 1e-10);

} // namespace shield
