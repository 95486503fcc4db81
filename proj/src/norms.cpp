#include "advreg/norms.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace advreg {

Exponent Exponent::finite(double q)
{
    if (!(q >= 1.0) || !std::isfinite(q)) {
        throw InvalidArgument("exponent must be a finite value >= 1, got " + std::to_string(q));
    }
    return Exponent(false, q);
}

Exponent Exponent::conjugate() const
{
    if (infinite_) return finite(1.0);
    if (value_ == 1.0) return infinity();
    if (value_ == 2.0) return finite(2.0);
    return finite(value_ / (value_ - 1.0));
}

double lq_norm(const Vector& z, Exponent q)
{
    if (z.size() == 0) return 0.0;
    if (q.is_infinite()) return z.cwiseAbs().maxCoeff();
    const double e = q.value();
    if (e == 1.0) return z.cwiseAbs().sum();
    if (e == 2.0) return std::sqrt(z.squaredNorm());
    const double m = z.cwiseAbs().maxCoeff();
    if (m == 0.0) return 0.0;
    double acc = 0.0;
    for (Index j = 0; j < z.size(); ++j) acc += std::pow(std::abs(z[j]) / m, e);
    return m * std::pow(acc, 1.0 / e);
}

double lq_norm(const Vector& z, double q)
{
    if (std::isinf(q) && q > 0) return lq_norm(z, Exponent::infinity());
    if (!(q >= 1.0)) throw InvalidArgument("lq_norm: q must be >= 1, got " + std::to_string(q));
    return lq_norm(z, Exponent::finite(q));
}

double weighted_group_norm(const Vector& z, const WeightedGroupNorm& norm)
{
    const auto& part = norm.partition;
    if (z.size() != part.dimension()) {
        throw InvalidArgument("weighted_group_norm: vector has length " + std::to_string(z.size()) +
                              ", partition covers " + std::to_string(part.dimension()));
    }
    const Index L = part.num_groups();
    Vector per_group(L);
    for (Index l = 0; l < L; ++l) {
        const double inner = lq_norm(part.restrict(z, l), norm.inner);
        // A zero group contributes zero regardless of weight.
        per_group[l] = inner == 0.0 ? 0.0 : norm.effective_weight(l) * inner;
    }
    return lq_norm(per_group, norm.outer);
}

WeightedGroupNorm dual_norm_params(const WeightedGroupNorm& norm)
{
    WeightedGroupNorm dual = norm;
    dual.inner = norm.inner.conjugate();
    dual.outer = norm.outer.conjugate();
    dual.mode = norm.mode == WeightMode::direct ? WeightMode::inverse : WeightMode::direct;
    return dual;
}

namespace {

// u with ||u||_r = 1 and <z, u> = ||z||_{r*}, r* the conjugate of r.
Vector holder_extremizer(const Vector& z, Exponent r)
{
    Vector u = Vector::Zero(z.size());
    if (z.size() == 0) return u;
    const Exponent q = r.conjugate();
    if (r.is_infinite()) {
        for (Index j = 0; j < z.size(); ++j) u[j] = z[j] > 0 ? 1.0 : (z[j] < 0 ? -1.0 : 0.0);
        return u;
    }
    const double zq = lq_norm(z, q);
    if (zq == 0.0) return u;
    if (q.is_infinite()) {
        Index k = 0;
        z.cwiseAbs().maxCoeff(&k);
        u[k] = z[k] > 0 ? 1.0 : -1.0;
        return u;
    }
    const double e = q.value();
    for (Index j = 0; j < z.size(); ++j) {
        const double a = std::abs(z[j]) / zq;
        u[j] = (z[j] < 0 ? -1.0 : 1.0) * std::pow(a, e - 1.0);
    }
    return u;
}

}  // namespace

Vector dual_extremizer(const Vector& z, const WeightedGroupNorm& norm)
{
    const auto& part = norm.partition;
    const Index L = part.num_groups();
    Vector inner_dual(L);
    std::vector<Vector> directions(static_cast<std::size_t>(L));
    const Exponent q = norm.inner.conjugate();
    for (Index l = 0; l < L; ++l) {
        const Vector zl = part.restrict(z, l);
        directions[static_cast<std::size_t>(l)] = holder_extremizer(zl, norm.inner);
        inner_dual[l] = lq_norm(zl, q) / norm.effective_weight(l);
    }
    const Vector b = holder_extremizer(inner_dual, norm.outer);
    Vector u = Vector::Zero(z.size());
    for (Index l = 0; l < L; ++l) {
        const double scale = b[l] / norm.effective_weight(l);
        const auto& g = part.group(l);
        const auto& d = directions[static_cast<std::size_t>(l)];
        for (std::size_t k = 0; k < g.size(); ++k) u[g[k]] = scale * d[static_cast<Index>(k)];
    }
    return u;
}

double dual_norm_by_search(const Vector& z, const WeightedGroupNorm& norm, int n_samples,
                           std::uint64_t rng_seed, bool include_extremizer)
{
    if (n_samples < 1) throw InvalidArgument("dual_norm_by_search: n_samples must be >= 1");
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double best = 0.0;
    Vector u(z.size());
    for (int k = 0; k < n_samples; ++k) {
        for (Index j = 0; j < u.size(); ++j) u[j] = normal(rng);
        const double nu = weighted_group_norm(u, norm);
        if (nu == 0.0) continue;
        best = std::max(best, std::abs(z.dot(u)) / nu);
    }
    if (include_extremizer) {
        const Vector e = dual_extremizer(z, norm);
        const double ne = weighted_group_norm(e, norm);
        if (ne > 0.0) best = std::max(best, z.dot(e) / ne);
    }
    return best;
}

}  // namespace advreg
