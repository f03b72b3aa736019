#pragma once

#include <string>
#include <vector>

#include "shield/types.hpp"

namespace shield {

// randomized closed-form vs dual-ascent QP cross-validation
struct QpSuiteReport {
    int n_single = 0;
    int n_multi = 0;
    double max_diff_single = 0.0; // |u_closed - u_dual|_inf, single-row instances (tol 1e-9)
    double max_diff_multi = 0.0;  // disjoint multi-row instances (tol 1e-8)
    double max_feasibility_viol = 0.0; // max(a.u - b) over rows
    double max_complementarity = 0.0;  // |lambda * (a.u - b)|
    bool pass = false;
};

QpSuiteReport qp_equivalence_suite(std::uint64_t seed, int n_single = 1000, int n_multi = 200);

// finite-difference gradient validation across every barrier kind
struct GradCheckEntry {
    std::string name;
    double error = 0.0; // worst relative FD mismatch
    double tol = 0.0;
    bool pass = false;
};

std::vector<GradCheckEntry> grad_check_suite(std::uint64_t seed);

// forced-control KL estimates against the closed form 0.5*|u|^2*T/g^2
struct KlCheckEntry {
    double u = 0.0, g = 0.0, T = 0.0;
    double expected = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double rel_error = 0.0;
    bool pass = false;
};

std::vector<KlCheckEntry> kl_check_suite(int n_paths, std::uint64_t seed, int threads,
                                         double rel_tol = 0.05);

} // namespace shield
