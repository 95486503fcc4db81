#pragma once

// Reference computations written independently of the library. Nothing here
// calls into advreg beyond its plain types.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Groups = std::vector<std::vector<int>>;

inline double sq(double x) { return x * x; }

// max over the 2^p corners of the l_inf ball of ((x + D)^T b - y)^2. The
// objective is convex in D, so a corner attains the maximum.
inline double corner_sample_sup(const Vec& x, double y, const Vec& b, double delta)
{
    const int p = static_cast<int>(x.size());
    double best = 0.0;
    for (int mask = 0; mask < (1 << p); ++mask) {
        double v = -y;
        for (int j = 0; j < p; ++j) v += (x[j] + ((mask >> j) & 1 ? delta : -delta)) * b[j];
        best = std::max(best, v * v);
    }
    return best;
}

inline double corner_primal(const Mat& X, const Vec& Y, const Vec& b, double delta)
{
    double acc = 0.0;
    for (int i = 0; i < X.rows(); ++i) acc += corner_sample_sup(X.row(i).transpose(), Y[i], b, delta);
    return acc / static_cast<double>(X.rows());
}

inline double dual_classic(const Mat& X, const Vec& Y, const Vec& b, double delta)
{
    const double pen = b.cwiseAbs().sum();
    double acc = 0.0;
    for (int i = 0; i < X.rows(); ++i) acc += sq(std::abs(X.row(i).dot(b) - Y[i]) + delta * pen);
    return acc / static_cast<double>(X.rows());
}

inline double group_pen(const Vec& b, const Groups& g, const Vec& w)
{
    double acc = 0.0;
    for (std::size_t l = 0; l < g.size(); ++l) {
        double s = 0.0;
        for (int j : g[l]) s += b[j] * b[j];
        acc += std::sqrt(s) / w[static_cast<int>(l)];
    }
    return acc;
}

inline double dual_group(const Mat& X, const Vec& Y, const Vec& b, const Groups& g, const Vec& w, double delta)
{
    const double pen = group_pen(b, g, w);
    double acc = 0.0;
    for (int i = 0; i < X.rows(); ++i) acc += sq(std::abs(X.row(i).dot(b) - Y[i]) + delta * pen);
    return acc / static_cast<double>(X.rows());
}

// Uniform-ish point of the weighted (2,inf) ball: group l gets a random
// direction and radius (delta / w_l) * u, u uniform in [0,1].
template <class Rng>
Vec random_group_perturbation(int p, const Groups& g, const Vec& w, double delta, Rng& rng)
{
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Vec d = Vec::Zero(p);
    for (std::size_t l = 0; l < g.size(); ++l) {
        Vec v(static_cast<int>(g[l].size()));
        for (int k = 0; k < v.size(); ++k) v[k] = N(rng);
        const double nv = v.norm();
        if (nv == 0.0) continue;
        const double rad = delta / w[static_cast<int>(l)] * (U(rng) < 0.1 ? 1.0 : U(rng));
        for (int k = 0; k < v.size(); ++k) d[g[l][static_cast<std::size_t>(k)]] = rad * v[k] / nv;
    }
    return d;
}

inline double ols_objective_min_1d_grid(double x, double y, double delta, double lo, double hi, double step)
{
    double best = INFINITY;
    for (double b = lo; b <= hi + 1e-15; b += step) best = std::min(best, sq(std::abs(x * b - y) + delta * std::abs(b)));
    return best;
}

inline Vec least_squares(const Mat& X, const Vec& Y) { return X.colPivHouseholderQr().solve(Y); }

// Tuning displays with the constants written out from scratch.
inline double classic_rule(long n, long p)
{
    const double c = 4.0 / (std::sqrt(2.0 / M_PI) - 0.1);
    return c * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

inline double group_rule(long n, long p_l, long L)
{
    const double c = 2.0 / (std::sqrt(2.0 / M_PI) - 0.1);
    return c * std::sqrt((3.0 * static_cast<double>(p_l) + 9.0 * std::log(static_cast<double>(L))) / static_cast<double>(n));
}

// Weighted (r,s) norm folded by hand; r, s may be INFINITY.
inline double rs_norm(const Vec& z, const Groups& g, const Vec& w, double r, double s)
{
    std::vector<double> blocks;
    for (std::size_t l = 0; l < g.size(); ++l) {
        double acc = 0.0;
        for (int j : g[l]) {
            const double a = std::abs(w[static_cast<int>(l)] * z[j]);
            acc = std::isinf(r) ? std::max(acc, a) : acc + std::pow(a, r);
        }
        blocks.push_back(std::isinf(r) ? acc : std::pow(acc, 1.0 / r));
    }
    double out = 0.0;
    for (double b : blocks) out = std::isinf(s) ? std::max(out, b) : out + std::pow(b, s);
    return std::isinf(s) ? out : std::pow(out, 1.0 / s);
}

inline double conj(double q)
{
    if (std::isinf(q)) return 1.0;
    if (q == 1.0) return INFINITY;
    return q / (q - 1.0);
}

// Random n x p matrix with X^T X / n = I.
template <class Rng>
Mat orthonormal_design(int n, int p, Rng& rng)
{
    std::normal_distribution<double> N;
    Mat A(n, p);
    for (int k = 0; k < A.size(); ++k) A.data()[k] = N(rng);
    Eigen::HouseholderQR<Mat> qr(A);
    Mat Q = qr.householderQ() * Mat::Identity(n, p);
    return std::sqrt(static_cast<double>(n)) * Q;
}

}  // namespace oracle
