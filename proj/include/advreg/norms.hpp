#pragma once

#include <cstdint>

#include "advreg/model_data.hpp"

namespace advreg {

/// An exponent in [1, inf]. Infinity is a distinct state, never a floating
/// point inf, so the max-branch of every norm is evaluated exactly.
class Exponent {
public:
    static Exponent finite(double q);
    static Exponent infinity() { return Exponent(true, 0.0); }

    bool is_infinite() const { return infinite_; }
    /// Only meaningful for finite exponents.
    double value() const { return value_; }

    /// Hoelder conjugate: 1/q + 1/q* = 1.
    Exponent conjugate() const;

    bool operator==(const Exponent&) const = default;

private:
    Exponent(bool inf, double v) : infinite_(inf), value_(v) {}
    bool infinite_;
    double value_;
};

enum class WeightMode { direct, inverse };

/// || z_w ||_{r,s} = ( sum_l || w_l z^l ||_r^s )^{1/s}, with w_l replaced by
/// 1/w_l in inverse mode.
struct WeightedGroupNorm {
    GroupPartition partition;
    Exponent inner = Exponent::finite(2.0);
    Exponent outer = Exponent::infinity();
    WeightMode mode = WeightMode::direct;

    double effective_weight(Index l) const
    {
        const double w = partition.weight(l);
        return mode == WeightMode::direct ? w : 1.0 / w;
    }
};

double lq_norm(const Vector& z, Exponent q);
/// Convenience overload; q may be +inf here.
double lq_norm(const Vector& z, double q);

double weighted_group_norm(const Vector& z, const WeightedGroupNorm& norm);

/// Conjugate exponents on both levels and inverted weights.
WeightedGroupNorm dual_norm_params(const WeightedGroupNorm& norm);

/// Analytic maximizer of <z, u> over the unit ball of `norm`; its value is
/// the dual norm of z.
Vector dual_extremizer(const Vector& z, const WeightedGroupNorm& norm);

/// Lower estimate of sup { <z,u> : ||u||_norm <= 1 } from random directions
/// scaled onto the unit sphere, plus the analytic extremizer.
double dual_norm_by_search(const Vector& z, const WeightedGroupNorm& norm, int n_samples,
                           std::uint64_t rng_seed, bool include_extremizer = true);

}  // namespace advreg
