#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "advreg/io.hpp"
#include "advreg/model_data.hpp"

namespace advreg {

struct PredictionError {
    double half_mean = 0.0;  // (1/2n) ||X (b - b*)||^2
    double mean = 0.0;       // (1/n)  ||X (b - b*)||^2
};

PredictionError prediction_error(const Dataset& data, const Vector& beta_hat, const Vector& beta_star);

// ---------------------------------------------------------------------------
// Restricted eigenvalue estimates

enum class ReKind { re, gre };
enum class ReMode { exact_orthonormal, sampled_upper_estimate };

const char* to_string(ReKind k);
const char* to_string(ReMode m);

struct ReOptions {
    /// Random cone vectors drawn per support.
    int samples_per_support = 64;
    /// Projected-gradient refinement steps on the best candidate per support.
    int refine_iters = 40;
    /// Supports are enumerated when C(p or L, size) <= this and p <= 12,
    /// otherwise this many are sampled.
    int max_supports = 256;
    std::uint64_t seed = 0;
    /// ||X^T X / n - I||_max below this counts as an orthonormal design.
    double orthonormal_tol = 1e-10;
};

/// Minimum of ||X v||_2 / (sqrt(n) ||v_D||_2) over the candidate cone vectors
/// examined. D is all coordinates for RE and G_J for GRE. Except in the
/// orthonormal case the value is an upper estimate of the true constant:
/// it minimizes over a subset of the cone.
struct ReEstimate {
    ReKind kind = ReKind::re;
    double value = 0.0;
    ReMode mode = ReMode::sampled_upper_estimate;
    int samples = 0;  // candidate vectors evaluated
    std::uint64_t seed = 0;
    Index size = 0;   // s or g
    double cone = 0.0;  // c1 or c2
    bool supports_enumerated = false;
    Index supports = 0;
};

/// gamma(s, c1). Uses the Gram matrix, so cost grows with p^2.
ReEstimate re_constant(const Matrix& X, Index s, double c1, const ReOptions& opts = {});

/// kappa(g, c2) with cone sum_{J^c} ||v^l||/w_l <= c2 sum_J ||v^l||/w_l.
ReEstimate gre_constant(const Matrix& X, const GroupPartition& partition, Index g, double c2,
                        const ReOptions& opts = {});

bool is_orthonormal_design(const Matrix& X, double tol = 1e-10);

/// The blockwise hypothesis X_{G_l}^T X_{G_l} / n = I for every group.
bool blocks_orthonormal(const Matrix& X, const GroupPartition& partition, double tol = 1e-8);

// ---------------------------------------------------------------------------
// Prediction-error bounds

enum class BoundForm { theorem, corollary_highprob, corollary_simplified };

const char* to_string(BoundForm f);
BoundForm parse_bound_form(const std::string& s);

struct ClassicBoundInputs {
    Index s = 0;
    Index p = 0;
    Index n = 0;
    double delta = 0.0;
    double gamma = 0.0;
    double eps_l1 = 0.0;  // ||eps||_1
    double beta_star_l2 = 0.0;
    double sigma = 0.0;
};

struct GroupBoundInputs {
    Index g = 0;
    Index size_GJ = 0;
    Index L = 0;
    Index n = 0;
    double delta = 0.0;
    Vector omega_J;  // weights of the support groups
    double kappa = 0.0;
    double eps_l1 = 0.0;
    double beta_star_l2 = 0.0;
    double sigma = 0.0;
    /// Result of blocks_orthonormal; the corollary forms need it.
    bool blocks_orthonormal = false;
};

struct BoundReport {
    Variant variant = Variant::classic;
    BoundForm form = BoundForm::theorem;
    /// NaN when undefined (gamma/kappa = 0 where the form divides by it).
    double bound = 0.0;
    bool defined = true;
    /// False when a hypothesis the form relies on is known to fail.
    bool applicable = true;
    double R = 0.0;  // simplified forms only
    std::optional<bool> sigma_condition;
    /// Rate factor multiplying the max{...} or R^2 term.
    double rate = 0.0;
    std::optional<PredictionError> empirical;
    std::optional<bool> dominated;
    std::string note;
    io::json inputs;
};

BoundReport bound_classic(const ClassicBoundInputs& in, BoundForm form);
BoundReport bound_group(const GroupBoundInputs& in, BoundForm form);

/// Attach the empirical error and set dominated = (half_mean <= bound).
void attach_empirical(BoundReport& report, const PredictionError& err);

io::json to_json(const BoundReport& report);
io::json to_json(const ReEstimate& est);

// ---------------------------------------------------------------------------
// Shrinkage lemma

struct ShrinkageReport {
    double estimate_norm = 0.0;  // ||b||_1 or ||b_{w^-1}||_{2,1}
    double truth_norm = 0.0;
    /// estimate_norm / truth_norm; NaN when both are 0.
    double ratio = 0.0;
    bool degenerate = false;
    bool holds = true;  // estimate_norm <= 9 * truth_norm
};

ShrinkageReport shrinkage_check(const Vector& beta_hat, const Vector& beta_star, Variant variant,
                                const std::optional<GroupPartition>& partition = std::nullopt);

io::json to_json(const ShrinkageReport& r);

}  // namespace advreg
