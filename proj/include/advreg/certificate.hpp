#pragma once

#include "advreg/objective.hpp"

namespace advreg {

struct CertificateOptions {
    /// |r_i| <= residual_tol * (1 + ||Y||_inf) counts as a zero residual.
    double residual_tol = 1e-10;
    /// ||beta^l|| <= coef_tol * (1 + ||beta||_inf) counts as a zero block.
    double coef_tol = 1e-12;
    int max_iters = 400;
    int max_newton_iters = 100;
};

/// Approximate minimum-norm element of the subdifferential of the dual loss.
///
/// The free sign variables are z_i in [-1,1] on (numerically) zero residuals
/// and the ball-valued directions on zero coefficient blocks. The block
/// directions are eliminated in closed form (block soft-thresholding), the
/// remaining box-constrained least-squares problem in z is solved by a
/// least-squares start, accelerated projected gradient and projected Newton. Any
/// feasible z yields a true subgradient, so `norm` is an upper bound on the
/// exact minimum norm.
struct MinNormSubgradient {
    Vector g;
    double norm = 0.0;
    IndexSet zero_residuals;
    IndexSet zero_blocks;
    Vector z;  // free signs on zero_residuals, same order
};

MinNormSubgradient min_norm_subgradient(const AdvObjectiveSpec& spec, const Vector& beta,
                                        const CertificateOptions& opts = {});

}  // namespace advreg
