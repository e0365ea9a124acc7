// SPDX-License-Identifier: MIT
/**
 * @file roots.hpp
 * @brief Zeros of E_{a,a} for 1 < a <= 2, with argument-principle certification.
 *
 * Roots are located three ways: a sign scan of the real negative axis,
 * recursive rectangle subdivision for the small ones, and Newton iteration
 * from the large-|z| seeds. Every annulus between consecutive seeds is then
 * recounted with the argument principle. All roots are finally polished in
 * 64-digit arithmetic because the residue series downstream cancel heavily.
 */
#pragma once

#include "stable_exit/complex.hpp"

#include <complex>
#include <vector>

namespace stable_exit {

struct Root {
    std::complex<double> value;
    Cx<hp_real> precise;
    /// +n / -n for a conjugate pair lying in the n-th annulus between separating circles, 0 for real
    /// roots. Where a predicted pair has collapsed onto the real axis its index is skipped.
    int index = 0;
    double residual = 0.0;         ///< |E_{a,a}| at the polished root
    double derivative_modulus = 0.0;
    bool near_degenerate = false;  ///< derivative too small for a simple-root residue
};

struct AnnulusCount {
    double r_inner;
    double r_outer;
    int counted;     ///< argument-principle count
    int tabulated;   ///< roots in the table with r_inner <= |z| < r_outer
};

struct RootTable {
    double alpha = 0.0;
    double rho = 0.0;        ///< -rho is the largest real root
    int max_index = 0;       ///< highest pair index covered; collapsed indices make this exceed pair_count()
    double radius = 0.0;     ///< the table holds every root with |z| < radius
    int certified_through_index = 0;
    std::vector<Root> roots; ///< ascending modulus; upper member of a pair first
    std::vector<AnnulusCount> annuli;

    [[nodiscard]] int real_count() const;
    [[nodiscard]] int pair_count() const;  ///< conjugate pairs tabulated
    /// The n-th root in the upper half plane (n >= 1); throws if absent.
    [[nodiscard]] const Root& pair(int n) const;
    [[nodiscard]] bool any_near_degenerate() const;
};

/// Every root with |z| below the circle separating predicted pairs n and n+1.
RootTable enumerate_roots(double alpha, int n);

/// Like enumerate_roots, but extends the index range past collapsed pairs until exactly
/// `pairs` conjugate pairs are tabulated.
RootTable enumerate_root_pairs(double alpha, int pairs);

/// Every root with |z| < radius, found by subdivision of the whole disk.
RootTable enumerate_roots_within(double alpha, double radius);

/// rho > 0 such that -rho is the real zero of E_{a,a} closest to the origin.
double largest_real_root(double alpha);

/// Argument-principle count of zeros with r_inner < |z| < r_outer (r_inner may be 0).
int verify_root_count(double alpha, double r_inner, double r_outer);

/// Predicted n-th root in the upper half plane, from the leading-order root equation.
std::complex<double> predicted_root(double alpha, int n);

/// Radius midway (in |z|^{1/alpha}) between predicted pairs n and n+1.
double separating_radius(double alpha, int n);

}  // namespace stable_exit
