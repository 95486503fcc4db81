#pragma once

#include <cstdint>
#include <optional>

#include "advreg/types.hpp"

namespace advreg {

/// Fixed design X (n x p) and response Y (n).
struct Dataset {
    Matrix X;
    Vector Y;

    Index n() const { return X.rows(); }
    Index p() const { return X.cols(); }

    /// Throws InvalidArgument on shape mismatch or non-finite entries.
    void validate() const;
};

/// Oracle quantities of a synthetic draw. Only exists for generated data.
struct GroundTruth {
    Vector beta_star;
    IndexSet support;  // 0-based, ascending
    Vector epsilon;
    double sigma = 0.0;

    Index s() const { return static_cast<Index>(support.size()); }
};

/// Disjoint partition of {0..p-1} into L groups with positive weights.
class GroupPartition {
public:
    GroupPartition() = default;
    GroupPartition(std::vector<IndexSet> groups, Vector weights);

    /// Consecutive equal-size groups, unit weights. p must be divisible by size.
    static GroupPartition contiguous(Index p, Index group_size);
    /// One group per coordinate, unit weights.
    static GroupPartition singletons(Index p);

    Index num_groups() const { return static_cast<Index>(groups_.size()); }
    Index dimension() const { return p_; }
    const std::vector<IndexSet>& groups() const { return groups_; }
    const IndexSet& group(Index l) const { return groups_[static_cast<std::size_t>(l)]; }
    Index group_size(Index l) const { return static_cast<Index>(group(l).size()); }
    const Vector& weights() const { return weights_; }
    double weight(Index l) const { return weights_[l]; }

    GroupPartition with_weights(Vector weights) const;

    /// Sub-vector of z on group l.
    Vector restrict(const Vector& z, Index l) const;

private:
    std::vector<IndexSet> groups_;
    Vector weights_;
    Index p_ = 0;
};

struct SupportGroups {
    IndexSet groups;   // J, 0-based
    Index g = 0;       // |J|
    Index size_GJ = 0; // sum of p_l over J
};

struct NormalizedDesign {
    Matrix X;
    Vector scale;  // column j was multiplied by scale[j]
};

/// Rescale each column to Euclidean norm sqrt(n). Throws RescaleError on a
/// zero column.
NormalizedDesign normalize_columns(const Matrix& X);

struct SyntheticDraw {
    Dataset data;
    GroundTruth truth;
};

/// X iid N(0,1) then column-normalized, eps iid N(0, sigma^2), Y = X beta + eps.
/// sigma == 0 is accepted and gives the noiseless model.
SyntheticDraw generate_synthetic(Index n, Index p, const Vector& beta_star, double sigma,
                                 std::uint64_t rng_seed);

/// The 500-dimensional coefficient vector of the reference experiment:
/// (0.1, 0.2, 0.15, 0.25, 0, ..., 0, 0.9, 0.95, 1, 1.05).
Vector reference_beta_star(Index p = 500);

SupportGroups support_groups(const Vector& beta, const GroupPartition& partition,
                             double tol = 1e-10);

IndexSet support_of(const Vector& beta, double tol = 0.0);

}  // namespace advreg
