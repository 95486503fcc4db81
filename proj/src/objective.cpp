#include "advreg/objective.hpp"

#include <cmath>

#include "advreg/kernels.hpp"

namespace advreg {

AdvObjectiveSpec AdvObjectiveSpec::classic(std::shared_ptr<const Dataset> data, double delta)
{
    AdvObjectiveSpec spec;
    spec.data = std::move(data);
    spec.delta = delta;
    spec.variant = Variant::classic;
    spec.validate();
    return spec;
}

AdvObjectiveSpec AdvObjectiveSpec::group(std::shared_ptr<const Dataset> data,
                                         GroupPartition partition, double delta)
{
    AdvObjectiveSpec spec;
    spec.data = std::move(data);
    spec.delta = delta;
    spec.variant = Variant::group;
    spec.partition = std::move(partition);
    spec.validate();
    return spec;
}

AdvObjectiveSpec AdvObjectiveSpec::with_delta(double d) const
{
    AdvObjectiveSpec out = *this;
    out.delta = d;
    out.validate();
    return out;
}

void AdvObjectiveSpec::validate() const
{
    if (!data) throw InvalidArgument("objective: no dataset");
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw InvalidArgument("objective: delta must be finite and non-negative");
    }
    if (variant == Variant::group) {
        if (!partition) throw InvalidArgument("objective: group variant needs a partition");
        if (partition->dimension() != data->p()) {
            throw InvalidArgument("objective: partition covers " +
                                  std::to_string(partition->dimension()) + " coordinates, data has " +
                                  std::to_string(data->p()));
        }
    }
}

PenaltyBlocks PenaltyBlocks::from(const AdvObjectiveSpec& spec)
{
    PenaltyBlocks pb;
    if (spec.variant == Variant::classic) {
        pb.l1 = true;
        const Index p = spec.p();
        pb.blocks.resize(static_cast<std::size_t>(p));
        for (Index j = 0; j < p; ++j) pb.blocks[static_cast<std::size_t>(j)] = {j};
        pb.inv_weight = Vector::Ones(p);
    } else {
        pb.blocks = spec.partition->groups();
        pb.inv_weight = spec.partition->weights().cwiseInverse();
    }
    return pb;
}

double PenaltyBlocks::block_norm(const Vector& beta, Index l) const
{
    const auto& b = blocks[static_cast<std::size_t>(l)];
    if (l1) return std::abs(beta[b.front()]);
    double sq = 0.0;
    for (Index j : b) sq += beta[j] * beta[j];
    return std::sqrt(sq);
}

double PenaltyBlocks::value(const Vector& beta) const
{
    double acc = 0.0;
    if (l1) {
        for (Index j = 0; j < beta.size(); ++j) acc += std::abs(beta[j]);
        return acc;
    }
    for (Index l = 0; l < size(); ++l) {
        const double nl = block_norm(beta, l);
        if (nl != 0.0) acc += inv_weight[l] * nl;
    }
    return acc;
}

double penalty(const AdvObjectiveSpec& spec, const Vector& beta)
{
    if (beta.size() != spec.p()) throw InvalidArgument("penalty: dimension mismatch");
    double acc = 0.0;
    if (spec.variant == Variant::classic) {
        // Sequential sum so singleton groups with unit weights agree bitwise.
        for (Index j = 0; j < beta.size(); ++j) acc += std::abs(beta[j]);
        return acc;
    }
    const auto& part = *spec.partition;
    for (Index l = 0; l < part.num_groups(); ++l) {
        double sq = 0.0;
        for (Index j : part.group(l)) sq += beta[j] * beta[j];
        if (sq != 0.0) acc += std::sqrt(sq) / part.weight(l);
    }
    return acc;
}

double dual_adv_loss_from_residuals(const AdvObjectiveSpec& spec, const Vector& r, double pen)
{
    return kernels::adv_square_sum(r, spec.delta * pen) / static_cast<double>(spec.n());
}

double dual_adv_loss(const AdvObjectiveSpec& spec, const Vector& beta)
{
    if (beta.size() != spec.p()) throw InvalidArgument("dual_adv_loss: dimension mismatch");
    Vector r;
    kernels::residuals(spec.data->X, beta, spec.data->Y, r);
    return dual_adv_loss_from_residuals(spec, r, penalty(spec, beta));
}

Vector worst_case_perturbation(const Vector& x, double y, const Vector& beta,
                               const AdvObjectiveSpec& spec)
{
    if (x.size() != beta.size() || beta.size() != spec.p()) {
        throw InvalidArgument("worst_case_perturbation: dimension mismatch");
    }
    const double r = x.dot(beta) - y;
    const double sr = r < 0.0 ? -1.0 : 1.0;
    Vector delta_star = Vector::Zero(beta.size());
    if (spec.variant == Variant::classic) {
        for (Index j = 0; j < beta.size(); ++j) {
            if (beta[j] > 0.0) delta_star[j] = spec.delta * sr;
            else if (beta[j] < 0.0) delta_star[j] = -spec.delta * sr;
        }
        return delta_star;
    }
    const auto& part = *spec.partition;
    for (Index l = 0; l < part.num_groups(); ++l) {
        double sq = 0.0;
        for (Index j : part.group(l)) sq += beta[j] * beta[j];
        if (sq == 0.0) continue;
        const double scale = spec.delta * sr / (part.weight(l) * std::sqrt(sq));
        for (Index j : part.group(l)) delta_star[j] = scale * beta[j];
    }
    return delta_star;
}

double primal_adv_loss(const AdvObjectiveSpec& spec, const Vector& beta)
{
    if (beta.size() != spec.p()) throw InvalidArgument("primal_adv_loss: dimension mismatch");
    const auto& X = spec.data->X;
    const auto& Y = spec.data->Y;
    double acc = 0.0;
    for (Index i = 0; i < spec.n(); ++i) {
        const Vector xi = X.row(i).transpose();
        const Vector d = worst_case_perturbation(xi, Y[i], beta, spec);
        const double v = (xi + d).dot(beta) - Y[i];
        acc += v * v;
    }
    return acc / static_cast<double>(spec.n());
}

Subgradient subgradient(const AdvObjectiveSpec& spec, const Vector& beta)
{
    if (beta.size() != spec.p()) throw InvalidArgument("subgradient: dimension mismatch");
    const auto& X = spec.data->X;
    const Index n = spec.n();
    const Index p = spec.p();
    Vector r;
    kernels::residuals(X, beta, spec.data->Y, r);
    const double pen = penalty(spec, beta);
    const double a = spec.delta * pen;

    Subgradient out;
    out.z.resize(n);
    for (Index i = 0; i < n; ++i) out.z[i] = r[i] > 0.0 ? 1.0 : (r[i] < 0.0 ? -1.0 : 0.0);

    out.w = Vector::Zero(p);
    if (spec.variant == Variant::classic) {
        for (Index j = 0; j < p; ++j) out.w[j] = beta[j] > 0.0 ? 1.0 : (beta[j] < 0.0 ? -1.0 : 0.0);
    } else {
        const auto& part = *spec.partition;
        for (Index l = 0; l < part.num_groups(); ++l) {
            double sq = 0.0;
            for (Index j : part.group(l)) sq += beta[j] * beta[j];
            if (sq == 0.0) continue;
            const double scale = 1.0 / (part.weight(l) * std::sqrt(sq));
            for (Index j : part.group(l)) out.w[j] = scale * beta[j];
        }
    }

    // g = (2/n) [ X^T (e o z) + delta * (sum_i e_i) * w ],  e_i = |r_i| + delta*pen
    Vector ez(n);
    double esum = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double e = std::abs(r[i]) + a;
        ez[i] = e * out.z[i];
        esum += e;
    }
    Vector xt;
    kernels::gemv_t(X, ez, xt);
    out.g = (2.0 / static_cast<double>(n)) * (xt + (spec.delta * esum) * out.w);
    return out;
}

RegularizationTerms regularization_view(const AdvObjectiveSpec& spec, const Vector& beta)
{
    if (spec.variant != Variant::classic) {
        throw UnsupportedVariant("regularization_view: only defined for the classic variant");
    }
    if (beta.size() != spec.p()) throw InvalidArgument("regularization_view: dimension mismatch");
    Vector r;
    kernels::residuals(spec.data->X, beta, spec.data->Y, r);
    const double n = static_cast<double>(spec.n());
    const double l1 = beta.cwiseAbs().sum();
    RegularizationTerms t;
    t.mse = r.squaredNorm() / n;
    t.cross = spec.delta * l1 * (2.0 / n) * r.cwiseAbs().sum();
    t.square = spec.delta * spec.delta * l1 * l1;
    return t;
}

}  // namespace advreg
