#include "advreg/tuning.hpp"

#include <cmath>
#include <numbers>

namespace advreg {

double classic_rule_constant()
{
    return 4.0 / (std::sqrt(2.0 / std::numbers::pi) - 0.1);
}

double group_rule_constant()
{
    return 2.0 / (std::sqrt(2.0 / std::numbers::pi) - 0.1);
}

double delta_classic(Index n, Index p)
{
    if (n < 1) throw InvalidArgument("delta_classic: n must be >= 1");
    if (p < 2) throw InvalidArgument("delta_classic: p must be >= 2 (log p must be positive)");
    return classic_rule_constant() *
           std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

double group_rule_value(Index n, Index group_size, Index num_groups)
{
    if (n < 1) throw InvalidArgument("group rule: n must be >= 1");
    if (num_groups < 2) throw InvalidArgument("group rule: need at least 2 groups");
    const double num = 3.0 * static_cast<double>(group_size) +
                       9.0 * std::log(static_cast<double>(num_groups));
    return group_rule_constant() * std::sqrt(num / static_cast<double>(n));
}

TuningRule delta_group(Index n, const GroupPartition& partition)
{
    const Index L = partition.num_groups();
    if (L < 2) throw InvalidArgument("delta_group: need at least 2 groups");
    Vector rule(L);
    for (Index l = 0; l < L; ++l) rule[l] = group_rule_value(n, partition.group_size(l), L);
    TuningRule out;
    out.variant = Variant::group;
    out.n = n;
    out.p = partition.dimension();
    out.delta = rule[0];
    Vector omega(L);
    for (Index l = 0; l < L; ++l) omega[l] = out.delta / rule[l];
    omega[0] = 1.0;
    out.partition = partition.with_weights(omega);
    return out;
}

TuningRule tune(Variant variant, Index n, Index p, const std::optional<GroupPartition>& partition)
{
    if (variant == Variant::group) {
        if (!partition) throw InvalidArgument("tune: group variant needs a partition");
        return delta_group(n, *partition);
    }
    TuningRule out;
    out.n = n;
    out.p = p;
    out.delta = delta_classic(n, p);
    return out;
}

DeltaCondition check_delta_condition(const GroundTruth& truth, const Dataset& data, double delta,
                                     Variant variant, const std::optional<GroupPartition>& partition)
{
    if (truth.epsilon.size() == 0) {
        throw OracleUnavailable("check_delta_condition: noise vector not available");
    }
    if (truth.epsilon.size() != data.n()) {
        throw InvalidArgument("check_delta_condition: noise length does not match n");
    }
    DeltaCondition out;
    const double e1 = truth.epsilon.lpNorm<1>();
    const Vector xte = data.X.transpose() * truth.epsilon;

    if (variant == Variant::classic) {
        out.lhs.resize(1);
        out.margins.resize(1);
        if (e1 == 0.0) {
            out.degenerate = true;
            out.lhs[0] = std::nan("");
            out.margins[0] = std::nan("");
            return out;
        }
        out.lhs[0] = 2.0 * xte.cwiseAbs().maxCoeff() / e1;
        out.margins[0] = delta - out.lhs[0];
        out.pass = out.margins[0] >= 0.0;
        return out;
    }

    if (!partition) throw InvalidArgument("check_delta_condition: group variant needs a partition");
    const Index L = partition->num_groups();
    out.lhs.resize(L);
    out.margins.resize(L);
    if (e1 == 0.0) {
        out.degenerate = true;
        out.lhs.setConstant(std::nan(""));
        out.margins.setConstant(std::nan(""));
        return out;
    }
    out.pass = true;
    for (Index l = 0; l < L; ++l) {
        out.lhs[l] = 2.0 * partition->restrict(xte, l).norm() / e1;
        out.margins[l] = delta / partition->weight(l) - out.lhs[l];
        if (!(out.margins[l] >= 0.0)) out.pass = false;
    }
    return out;
}

}  // namespace advreg
