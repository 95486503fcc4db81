#include "advreg/certificate.hpp"

#include <cmath>

#include "advreg/kernels.hpp"

namespace advreg {

namespace {

struct BoxProblem {
    const PenaltyBlocks& pb;
    const std::vector<char>& zero_block;
    Vector c;          // fixed part of the (unscaled) subgradient
    Matrix B;          // p x k, column m is D_m * X_{Z_m}^T
    double threshold;  // delta * A

    // Block soft-threshold on zero blocks, identity elsewhere.
    Vector project_out(const Vector& v) const
    {
        Vector g = v;
        for (Index l = 0; l < pb.size(); ++l) {
            if (!zero_block[static_cast<std::size_t>(l)]) continue;
            const auto& b = pb.blocks[static_cast<std::size_t>(l)];
            const double tau = threshold * pb.inv_weight[l];
            double sq = 0.0;
            for (Index j : b) sq += v[j] * v[j];
            const double nv = std::sqrt(sq);
            const double keep = nv > tau ? 1.0 - tau / nv : 0.0;
            for (Index j : b) g[j] = keep * v[j];
        }
        return g;
    }

    Vector residual(const Vector& z) const { return project_out(c + B * z); }

    // Generalized Hessian of 0.5 * ||G(c + Bz)||^2 restricted to z's columns
    // `cols`: B^T J B with J the Jacobian of the block shrink at v = c + Bz.
    Matrix hessian(const Vector& v, const IndexSet& cols) const
    {
        const Index p = B.rows();
        const Index m = static_cast<Index>(cols.size());
        Matrix Bc(p, m);
        for (Index t = 0; t < m; ++t) Bc.col(t) = B.col(cols[static_cast<std::size_t>(t)]);
        Matrix JB = Bc;
        for (Index l = 0; l < pb.size(); ++l) {
            if (!zero_block[static_cast<std::size_t>(l)]) continue;
            const auto& b = pb.blocks[static_cast<std::size_t>(l)];
            const double tau = threshold * pb.inv_weight[l];
            double sq = 0.0;
            for (Index j : b) sq += v[j] * v[j];
            const double nv = std::sqrt(sq);
            if (nv <= tau) {
                for (Index j : b) JB.row(j).setZero();
                continue;
            }
            // (1 - tau/|v|) I + (tau/|v|) u u^T
            const double keep = 1.0 - tau / nv;
            Vector proj = Vector::Zero(m);
            for (Index j : b) proj += (v[j] / nv) * Bc.row(j).transpose();
            for (Index j : b) JB.row(j) = keep * Bc.row(j) + (tau / nv) * (v[j] / nv) * proj.transpose();
        }
        return Bc.transpose() * JB;
    }
};

Vector clip_unit(Vector z)
{
    return z.cwiseMax(-1.0).cwiseMin(1.0);
}

}  // namespace

MinNormSubgradient min_norm_subgradient(const AdvObjectiveSpec& spec, const Vector& beta,
                                        const CertificateOptions& opts)
{
    if (beta.size() != spec.p()) throw InvalidArgument("min_norm_subgradient: dimension mismatch");
    const auto& X = spec.data->X;
    const auto& Y = spec.data->Y;
    const Index n = spec.n();
    const PenaltyBlocks pb = PenaltyBlocks::from(spec);

    Vector r;
    kernels::residuals(X, beta, Y, r);
    const double pen = pb.value(beta);
    const double a = spec.delta * pen;
    double A = n * a;
    for (Index i = 0; i < n; ++i) A += std::abs(r[i]);
    const double threshold = spec.delta * A;

    MinNormSubgradient out;
    const double tol_r = opts.residual_tol * (1.0 + Y.cwiseAbs().maxCoeff());
    const double tol_b = opts.coef_tol * (1.0 + (beta.size() ? beta.cwiseAbs().maxCoeff() : 0.0));

    // The residual kink only exists when delta * penalty > 0, the block kink
    // only when delta * A > 0.
    Vector u(n);
    for (Index i = 0; i < n; ++i) {
        if (a > 0.0 && std::abs(r[i]) <= tol_r) {
            out.zero_residuals.push_back(i);
            u[i] = 0.0;
        } else {
            u[i] = (std::abs(r[i]) + a) * (r[i] < 0.0 ? -1.0 : 1.0);
        }
    }
    std::vector<char> zero_block(static_cast<std::size_t>(pb.size()), 0);
    Vector c;
    kernels::gemv_t(X, u, c);
    for (Index l = 0; l < pb.size(); ++l) {
        const double nl = pb.block_norm(beta, l);
        if (threshold > 0.0 && nl <= tol_b) {
            zero_block[static_cast<std::size_t>(l)] = 1;
            out.zero_blocks.push_back(l);
            continue;
        }
        if (nl == 0.0) continue;
        const double s = threshold * pb.inv_weight[l] / nl;
        for (Index j : pb.blocks[static_cast<std::size_t>(l)]) c[j] += s * beta[j];
    }

    const Index k = static_cast<Index>(out.zero_residuals.size());
    BoxProblem prob{pb, zero_block, std::move(c), Matrix(spec.p(), k), threshold};
    for (Index m = 0; m < k; ++m) {
        const Index i = out.zero_residuals[static_cast<std::size_t>(m)];
        prob.B.col(m) = (std::abs(r[i]) + a) * X.row(i).transpose();
    }

    Vector z = Vector::Zero(k);
    if (k > 0) {
        // Start from the least-squares solution on the free (nonzero-block)
        // coordinates, where the subgradient is linear in z.
        IndexSet free_rows;
        for (Index l = 0; l < pb.size(); ++l) {
            if (zero_block[static_cast<std::size_t>(l)]) continue;
            for (Index j : pb.blocks[static_cast<std::size_t>(l)]) free_rows.push_back(j);
        }
        double best = prob.residual(z).squaredNorm();
        if (!free_rows.empty()) {
            Matrix BT(static_cast<Index>(free_rows.size()), k);
            Vector cT(BT.rows());
            for (Index t = 0; t < BT.rows(); ++t) {
                BT.row(t) = prob.B.row(free_rows[static_cast<std::size_t>(t)]);
                cT[t] = prob.c[free_rows[static_cast<std::size_t>(t)]];
            }
            const Vector z_ls = clip_unit(BT.completeOrthogonalDecomposition().solve(-cT));
            const double v = prob.residual(z_ls).squaredNorm();
            if (z_ls.allFinite() && v < best) {
                best = v;
                z = z_ls;
            }
        }

        // Accelerated projected gradient on 0.5 * ||G(c + B z)||^2, whose
        // gradient is B^T G(c + B z) with Lipschitz constant ||B||_2^2.
        const Matrix gram = prob.B.transpose() * prob.B;
        const double L = std::max(gram.selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff(), 1e-300);
        Vector x = z;
        Vector y = z;
        double t = 1.0;
        double fx = best;
        for (int it = 0; it < opts.max_iters && best > 0.0; ++it) {
            const Vector grad = prob.B.transpose() * prob.residual(y);
            const Vector x_new = clip_unit(y - grad / L);
            const double f_new = prob.residual(x_new).squaredNorm();
            if (f_new < best) {
                best = f_new;
                z = x_new;
            }
            const double step = (x_new - x).norm();
            if (f_new > fx) {
                // Function restart.
                t = 1.0;
                y = x;
                continue;
            }
            const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            y = x_new + ((t - 1.0) / t_new) * (x_new - x);
            x = x_new;
            fx = f_new;
            t = t_new;
            if (step <= 1e-15 * (1.0 + x.norm())) break;
        }

        // Projected Newton on the piecewise-quadratic objective. FISTA gets
        // the norm right quickly but not the direction; the direction matters
        // because callers use -g as a descent direction.
        for (int it = 0; it < opts.max_newton_iters && best > 0.0; ++it) {
            const Vector v = prob.c + prob.B * z;
            const Vector grad = prob.B.transpose() * prob.project_out(v);
            const double eps = 1e-12;
            IndexSet free;
            for (Index m = 0; m < k; ++m) {
                const bool at_lo = z[m] <= -1.0 + eps && grad[m] > 0.0;
                const bool at_hi = z[m] >= 1.0 - eps && grad[m] < 0.0;
                if (!at_lo && !at_hi) free.push_back(m);
            }
            Vector d = Vector::Zero(k);
            if (!free.empty()) {
                const Matrix H = prob.hessian(v, free);
                Vector gF(static_cast<Index>(free.size()));
                for (std::size_t t = 0; t < free.size(); ++t) gF[static_cast<Index>(t)] = grad[free[t]];
                const Vector dF = -H.completeOrthogonalDecomposition().solve(gF);
                if (dF.allFinite() && dF.dot(gF) < 0.0) {
                    for (std::size_t t = 0; t < free.size(); ++t) d[free[t]] = dF[static_cast<Index>(t)];
                }
            }
            if (d.squaredNorm() == 0.0) d = -grad / L;  // projected-gradient fallback
            bool moved = false;
            for (double s = 1.0; s > 1e-12; s *= 0.5) {
                const Vector zt = clip_unit(z + s * d);
                const double ft = prob.residual(zt).squaredNorm();
                if (ft < best) {
                    moved = (zt - z).norm() > 1e-16 * (1.0 + z.norm());
                    best = ft;
                    z = zt;
                    break;
                }
            }
            if (!moved) break;
        }
    }

    out.z = z;
    out.g = (2.0 / static_cast<double>(n)) * prob.residual(z);
    out.norm = out.g.norm();
    return out;
}

}  // namespace advreg
