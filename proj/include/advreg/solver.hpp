#pragma once

#include <optional>
#include <vector>

#include "advreg/objective.hpp"

namespace advreg {

enum class StepRule {
    /// Normalized subgradient steps c / sqrt(k) with iterate averaging.
    diminishing,
    /// Accelerated gradient with backtracking on a smoothed surrogate whose
    /// smoothing parameter is annealed towards zero.
    backtracking,
};

struct SolverOptions {
    int max_iters = 200000;
    double tol_rel_obj = 1e-9;
    double tol_cert = 1e-6;
    StepRule step_rule = StepRule::backtracking;
    std::optional<Vector> warm_start;  // zeros when empty
    int window = 50;
    /// Finish with active-set Newton polishing on the identified piece.
    bool polish = true;
    int max_polish_iters = 200;

    void validate() const;
};

struct FitResult {
    Vector beta_hat;
    double objective = 0.0;
    /// Norm of the (approximate) minimum-norm subgradient at beta_hat.
    double certificate = 0.0;
    int iters = 0;
    std::vector<double> trace;  // best objective so far, one entry per iteration
    bool converged = false;
};

/// Minimize the dual adversarial loss.
///
/// Runs the first-order stage selected by `step_rule`, then (optionally)
/// polishes: the zero coefficient blocks and zero residuals of the current
/// point are identified, the loss restricted to that piece is minimized by
/// equality-constrained Newton, and the minimum-norm subgradient is used both
/// as the stationarity certificate and as a steepest-descent direction when
/// the identified piece is wrong. All line searches are exact over the
/// piecewise structure of the loss, so kinks are landed on exactly.
///
/// converged is set when the certificate is below tol_cert and the relative
/// objective change over the last `window` iterations is below tol_rel_obj.
/// Hitting max_iters is not an error; a NaN objective throws NumericalFailure.
FitResult fit(const AdvObjectiveSpec& spec, const SolverOptions& opts = {});

/// Exhaustive grid minimization over [-box_radius, box_radius]^p, p <= 3.
/// Reference oracle for tests; never marks itself converged.
FitResult brute_force_fit(const AdvObjectiveSpec& spec, double box_radius, int grid_points_per_dim);

/// Fits along ascending delta values, warm-starting each from the previous.
/// The delta stored in `base` is ignored.
std::vector<FitResult> coefficient_path(const AdvObjectiveSpec& base,
                                        const std::vector<double>& deltas,
                                        const SolverOptions& opts = {});

/// Log-spaced grid of `count` values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int count);

}  // namespace advreg
