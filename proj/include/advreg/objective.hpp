#pragma once

#include <memory>
#include <optional>

#include "advreg/model_data.hpp"

namespace advreg {

/// Adversarial least squares: perturbation ball is the l_inf ball of radius
/// delta (classic) or the weighted (2,inf) group ball of radius delta (group).
struct AdvObjectiveSpec {
    std::shared_ptr<const Dataset> data;
    double delta = 0.0;
    Variant variant = Variant::classic;
    std::optional<GroupPartition> partition;

    static AdvObjectiveSpec classic(std::shared_ptr<const Dataset> data, double delta);
    static AdvObjectiveSpec group(std::shared_ptr<const Dataset> data, GroupPartition partition,
                                  double delta);

    AdvObjectiveSpec with_delta(double d) const;

    Index n() const { return data->n(); }
    Index p() const { return data->p(); }

    void validate() const;
};

/// Penalty blocks seen by the dual objective. Classic is the special case of
/// singleton blocks with unit inverse weight; kept as a distinct flag so the
/// l1 path stays a plain |b_j| sum.
struct PenaltyBlocks {
    std::vector<IndexSet> blocks;
    Vector inv_weight;
    bool l1 = false;

    static PenaltyBlocks from(const AdvObjectiveSpec& spec);

    Index size() const { return static_cast<Index>(blocks.size()); }
    double block_norm(const Vector& beta, Index l) const;
    /// ||beta||_1 for classic, sum_l ||beta^l||_2 / w_l for group.
    double value(const Vector& beta) const;
};

/// ||beta||_1 (classic) or ||beta_{w^-1}||_{2,1} (group).
double penalty(const AdvObjectiveSpec& spec, const Vector& beta);

/// Worst-case sample loss via the closed-form maximizer.
double primal_adv_loss(const AdvObjectiveSpec& spec, const Vector& beta);

/// (1/n) sum_i (|x_i^T beta - y_i| + delta * penalty(beta))^2
double dual_adv_loss(const AdvObjectiveSpec& spec, const Vector& beta);

/// Same as dual_adv_loss, given precomputed residuals r = X beta - Y.
double dual_adv_loss_from_residuals(const AdvObjectiveSpec& spec, const Vector& r, double pen);

/// Maximizer of ((x + D)^T beta - y)^2 over the perturbation ball.
/// sign(r) is taken as +1 when r = 0; coordinates/groups where beta vanishes
/// get no perturbation.
Vector worst_case_perturbation(const Vector& x, double y, const Vector& beta,
                               const AdvObjectiveSpec& spec);

struct Subgradient {
    Vector g;  // element of the subdifferential of dual_adv_loss
    Vector z;  // residual signs, in [-1, 1]
    Vector w;  // classic: coefficient signs in [-1,1]; group: stacked t^l directions
};

/// Deterministic subgradient: z_i = 0 where r_i = 0, w = 0 on zero
/// coordinates / groups. Equals the gradient wherever the loss is smooth.
Subgradient subgradient(const AdvObjectiveSpec& spec, const Vector& beta);

struct RegularizationTerms {
    double mse;     // (1/n) ||X beta - Y||^2
    double cross;   // delta ||beta||_1 (2/n) ||X beta - Y||_1
    double square;  // delta^2 ||beta||_1^2
};

/// Three-term expansion of the classic dual loss. Throws UnsupportedVariant
/// for the group variant.
RegularizationTerms regularization_view(const AdvObjectiveSpec& spec, const Vector& beta);

}  // namespace advreg
