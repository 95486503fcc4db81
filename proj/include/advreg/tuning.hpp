#pragma once

#include <optional>

#include "advreg/model_data.hpp"

namespace advreg {

/// 4 / (sqrt(2/pi) - 1/10)
double classic_rule_constant();
/// 2 / (sqrt(2/pi) - 1/10)
double group_rule_constant();

/// delta = 4/(sqrt(2/pi)-0.1) * sqrt(log p / n), natural log. Needs n >= 1, p >= 2.
double delta_classic(Index n, Index p);

/// Per-group rule value 2/(sqrt(2/pi)-0.1) * sqrt((3 p_l + 9 log L) / n).
double group_rule_value(Index n, Index group_size, Index num_groups);

struct TuningRule {
    Variant variant = Variant::classic;
    Index n = 0;
    Index p = 0;
    double delta = 0.0;
    /// Group variant only: the input partition carrying the tuned weights.
    std::optional<GroupPartition> partition;
};

/// Group rule: only delta/omega_l is pinned down, so omega_1 = 1 and
/// delta = rule_1, omega_l = delta / rule_l. Needs L >= 2.
TuningRule delta_group(Index n, const GroupPartition& partition);

TuningRule tune(Variant variant, Index n, Index p, const std::optional<GroupPartition>& partition);

struct DeltaCondition {
    bool pass = false;
    /// eps = 0: the ratio is 0/0 and the condition is not evaluated.
    bool degenerate = false;
    /// One entry (classic) or one per group: threshold minus left-hand side.
    Vector margins;
    Vector lhs;
};

/// Oracle admissibility check 2||X^T eps||_inf / ||eps||_1 <= delta, or per
/// group 2||(X^T eps)^l||_2 / ||eps||_1 <= delta / omega_l.
/// Throws OracleUnavailable if the truth has no noise vector.
DeltaCondition check_delta_condition(const GroundTruth& truth, const Dataset& data, double delta,
                                     Variant variant,
                                     const std::optional<GroupPartition>& partition = std::nullopt);

}  // namespace advreg
