#include "advreg/model_data.hpp"

#include <cmath>
#include <random>
#include <string>

namespace advreg {

void Dataset::validate() const
{
    if (X.rows() != Y.size()) {
        throw InvalidArgument("dataset: X has " + std::to_string(X.rows()) + " rows but Y has " +
                              std::to_string(Y.size()) + " entries");
    }
    if (X.rows() == 0 || X.cols() == 0) throw InvalidArgument("dataset: empty design");
    if (!X.allFinite()) throw InvalidArgument("dataset: X has non-finite entries");
    if (!Y.allFinite()) throw InvalidArgument("dataset: Y has non-finite entries");
}

GroupPartition::GroupPartition(std::vector<IndexSet> groups, Vector weights)
    : groups_(std::move(groups)), weights_(std::move(weights))
{
    if (groups_.empty()) throw InvalidArgument("partition: no groups");
    if (static_cast<Index>(groups_.size()) != weights_.size()) {
        throw InvalidArgument("partition: " + std::to_string(groups_.size()) + " groups but " +
                              std::to_string(weights_.size()) + " weights");
    }
    Index total = 0;
    Index max_index = -1;
    for (const auto& g : groups_) {
        if (g.empty()) throw InvalidArgument("partition: empty group");
        total += static_cast<Index>(g.size());
        for (Index j : g) {
            if (j < 0) throw InvalidArgument("partition: negative index");
            max_index = std::max(max_index, j);
        }
    }
    p_ = total;
    if (max_index + 1 != p_) throw InvalidArgument("partition: groups do not cover 0..p-1");
    std::vector<char> seen(static_cast<std::size_t>(p_), 0);
    for (const auto& g : groups_) {
        for (Index j : g) {
            auto& s = seen[static_cast<std::size_t>(j)];
            if (s) throw InvalidArgument("partition: index " + std::to_string(j) + " appears twice");
            s = 1;
        }
    }
    for (Index l = 0; l < weights_.size(); ++l) {
        if (!(weights_[l] > 0.0) || !std::isfinite(weights_[l])) {
            throw InvalidArgument("partition: weight " + std::to_string(l) + " is not positive");
        }
    }
}

GroupPartition GroupPartition::contiguous(Index p, Index group_size)
{
    if (p <= 0 || group_size <= 0 || p % group_size != 0) {
        throw InvalidArgument("contiguous partition: p must be a positive multiple of group size");
    }
    std::vector<IndexSet> groups;
    for (Index start = 0; start < p; start += group_size) {
        IndexSet g(static_cast<std::size_t>(group_size));
        for (Index k = 0; k < group_size; ++k) g[static_cast<std::size_t>(k)] = start + k;
        groups.push_back(std::move(g));
    }
    const auto L = static_cast<Index>(groups.size());
    return GroupPartition(std::move(groups), Vector::Ones(L));
}

GroupPartition GroupPartition::singletons(Index p)
{
    return contiguous(p, 1);
}

GroupPartition GroupPartition::with_weights(Vector weights) const
{
    return GroupPartition(groups_, std::move(weights));
}

Vector GroupPartition::restrict(const Vector& z, Index l) const
{
    const auto& g = group(l);
    Vector out(static_cast<Index>(g.size()));
    for (std::size_t k = 0; k < g.size(); ++k) out[static_cast<Index>(k)] = z[g[k]];
    return out;
}

NormalizedDesign normalize_columns(const Matrix& X)
{
    const double target = std::sqrt(static_cast<double>(X.rows()));
    NormalizedDesign out{X, Vector(X.cols())};
    for (Index j = 0; j < X.cols(); ++j) {
        const double norm = X.col(j).norm();
        if (norm == 0.0) {
            throw RescaleError(j, "normalize_columns: column " + std::to_string(j) +
                                      " is identically zero");
        }
        const double scale = target / norm;
        out.scale[j] = scale;
        out.X.col(j) *= scale;
    }
    return out;
}

SyntheticDraw generate_synthetic(Index n, Index p, const Vector& beta_star, double sigma,
                                 std::uint64_t rng_seed)
{
    if (n <= 0 || p <= 0) throw InvalidArgument("generate_synthetic: n and p must be positive");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw InvalidArgument("generate_synthetic: sigma must be finite and non-negative");
    }
    if (beta_star.size() != p) {
        throw InvalidArgument("generate_synthetic: beta_star has length " +
                              std::to_string(beta_star.size()) + ", expected " + std::to_string(p));
    }

    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    Matrix X(n, p);
    for (Index j = 0; j < p; ++j)
        for (Index i = 0; i < n; ++i) X(i, j) = normal(rng);
    X = normalize_columns(X).X;

    Vector eps(n);
    for (Index i = 0; i < n; ++i) eps[i] = sigma * normal(rng);

    SyntheticDraw draw;
    draw.data.X = std::move(X);
    draw.data.Y = draw.data.X * beta_star + eps;
    draw.truth.beta_star = beta_star;
    draw.truth.support = support_of(beta_star);
    draw.truth.epsilon = std::move(eps);
    draw.truth.sigma = sigma;
    return draw;
}

Vector reference_beta_star(Index p)
{
    if (p < 8) throw InvalidArgument("reference_beta_star: p must be at least 8");
    Vector b = Vector::Zero(p);
    b.head(4) << 0.1, 0.2, 0.15, 0.25;
    b.tail(4) << 0.9, 0.95, 1.0, 1.05;
    return b;
}

SupportGroups support_groups(const Vector& beta, const GroupPartition& partition, double tol)
{
    if (beta.size() != partition.dimension()) {
        throw InvalidArgument("support_groups: dimension mismatch");
    }
    SupportGroups out;
    for (Index l = 0; l < partition.num_groups(); ++l) {
        double sq = 0.0;
        for (Index j : partition.group(l)) sq += beta[j] * beta[j];
        if (std::sqrt(sq) > tol) {
            out.groups.push_back(l);
            out.size_GJ += partition.group_size(l);
        }
    }
    out.g = static_cast<Index>(out.groups.size());
    return out;
}

IndexSet support_of(const Vector& beta, double tol)
{
    IndexSet s;
    for (Index j = 0; j < beta.size(); ++j)
        if (std::abs(beta[j]) > tol) s.push_back(j);
    return s;
}

}  // namespace advreg
