#include "advreg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "advreg/certificate.hpp"
#include "advreg/kernels.hpp"

namespace advreg {

void SolverOptions::validate() const
{
    if (max_iters < 1) throw InvalidArgument("solver: max_iters must be >= 1");
    if (!(tol_rel_obj > 0.0) || !(tol_cert > 0.0)) {
        throw InvalidArgument("solver: tolerances must be positive");
    }
    if (window < 1) throw InvalidArgument("solver: window must be >= 1");
    if (max_polish_iters < 0) throw InvalidArgument("solver: max_polish_iters must be >= 0");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kNewtonIters = 20;

class Problem {
public:
    explicit Problem(const AdvObjectiveSpec& spec)
        : spec(spec), X(spec.data->X), Y(spec.data->Y), pb(PenaltyBlocks::from(spec)),
          n(spec.n()), p(spec.p()), delta(spec.delta)
    {}

    void residuals(const Vector& beta, Vector& r) const { kernels::residuals(X, beta, Y, r); }

    double value_from(const Vector& r, double pen) const
    {
        return kernels::adv_square_sum(r, delta * pen) / static_cast<double>(n);
    }

    double value(const Vector& beta) const
    {
        Vector r;
        residuals(beta, r);
        return value_from(r, pb.value(beta));
    }

    /// Smoothed loss with |r| -> sqrt(r^2+mu^2)-mu and ||b^l|| -> sqrt(||b^l||^2+mu^2)-mu.
    double smoothed(const Vector& beta, const Vector& r, double mu, Vector* grad) const
    {
        double pmu = 0.0;
        Vector gp;
        if (grad) gp = Vector::Zero(p);
        for (Index l = 0; l < pb.size(); ++l) {
            const double nb = pb.block_norm(beta, l);
            const double s = std::sqrt(nb * nb + mu * mu);
            pmu += pb.inv_weight[l] * (s - mu);
            if (grad) {
                const double c = pb.inv_weight[l] / s;
                for (Index j : pb.blocks[static_cast<std::size_t>(l)]) gp[j] = c * beta[j];
            }
        }
        const double a = delta * pmu;
        Vector u(n);
        double f = 0.0;
        double esum = 0.0;
        for (Index i = 0; i < n; ++i) {
            const double s = std::sqrt(r[i] * r[i] + mu * mu);
            const double e = (s - mu) + a;
            f += e * e;
            esum += e;
            u[i] = e * r[i] / s;
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        if (grad) {
            kernels::gemv_t(X, u, *grad);
            *grad = (2.0 * inv_n) * (*grad + (delta * esum) * gp);
        }
        return f * inv_n;
    }

    const AdvObjectiveSpec& spec;
    const Matrix& X;
    const Vector& Y;
    PenaltyBlocks pb;
    Index n;
    Index p;
    double delta;
};

class Tracker {
public:
    Tracker(const Problem& pr, Vector x0, double f0) : pr_(pr), best_x(std::move(x0)), best_f(f0)
    {
        check(f0);
    }

    void record(const Vector& x, double f)
    {
        check(f);
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }
        trace.push_back(best_f);
    }

    /// Relative improvement of the best objective over the last `w` entries.
    double recent_change(int w) const
    {
        if (trace.size() < 2) return kInf;
        const std::size_t back = std::min<std::size_t>(static_cast<std::size_t>(w), trace.size() - 1);
        const double then = trace[trace.size() - 1 - back];
        const double now = trace.back();
        return (then - now) / std::max(std::abs(now), std::numeric_limits<double>::min());
    }

    const Problem& pr_;
    Vector best_x;
    double best_f;
    std::vector<double> trace;

private:
    static void check(double f)
    {
        if (std::isnan(f)) throw NumericalFailure("solver: objective evaluated to NaN");
    }
};

// ---------------------------------------------------------------------------
// First-order stages

// Called periodically by the first-order stages; returns true once the
// current best point is certified optimal.
using Finisher = std::function<bool()>;
constexpr std::size_t kFinishEvery = 500;

bool run_accelerated(const Problem& pr, Vector x, const SolverOptions& opts, Tracker& tr,
                     int budget, const Finisher& finish)
{
    const double y_rms = pr.n > 0 ? pr.Y.norm() / std::sqrt(static_cast<double>(pr.n)) : 1.0;
    const double scale = y_rms > 0.0 ? y_rms : 1.0;
    const std::vector<double> mus = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
    const int per_stage = std::max(1, budget / static_cast<int>(mus.size()));

    Vector r_x;
    pr.residuals(x, r_x);
    double L = 1.0;
    int used = 0;
    for (double mu_rel : mus) {
        if (used >= budget) break;
        const double mu = mu_rel * scale;
        Vector y = x;
        Vector r_y = r_x;
        Vector g;
        double fy = pr.smoothed(y, r_y, mu, &g);
        double fx = fy;
        double t = 1.0;
        std::vector<double> hist;
        Vector Xg;
        for (int k = 0; k < per_stage && used < budget; ++k, ++used) {
            const double g2 = g.squaredNorm();
            if (g2 == 0.0) break;
            kernels::gemv(pr.X, g, Xg);
            Vector xn;
            Vector rn;
            double fn = kInf;
            for (int bt = 0; bt < 80; ++bt) {
                xn = y - g / L;
                rn = r_y - Xg / L;
                fn = pr.smoothed(xn, rn, mu, nullptr);
                if (fn <= fy - g2 / (2.0 * L) + 1e-15 * std::abs(fy)) break;
                L *= 2.0;
            }
            tr.record(xn, pr.value_from(rn, pr.pb.value(xn)));
            if (finish && tr.trace.size() % kFinishEvery == 0 && finish()) return true;

            if (fn > fx) {
                // Function-value restart of the momentum.
                t = 1.0;
                y = x;
                r_y = r_x;
                fy = pr.smoothed(y, r_y, mu, &g);
                continue;
            }
            const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            const double mom = (t - 1.0) / t_new;
            y = xn + mom * (xn - x);
            r_y = rn + mom * (rn - r_x);
            x = std::move(xn);
            r_x = std::move(rn);
            fx = fn;
            t = t_new;
            if (k % 64 == 63) {
                pr.residuals(x, r_x);
                pr.residuals(y, r_y);
            }
            fy = pr.smoothed(y, r_y, mu, &g);
            L *= 0.95;

            hist.push_back(fx);
            const auto w = static_cast<std::size_t>(opts.window);
            if (hist.size() > w) {
                const double prev = hist[hist.size() - 1 - w];
                if (prev - fx <= opts.tol_rel_obj * std::max(std::abs(fx), 1e-300)) break;
            }
        }
        pr.residuals(x, r_x);
        if (finish && finish()) return true;
    }
    return false;
}

bool run_subgradient(const Problem& pr, Vector x, const SolverOptions& opts, Tracker& tr,
                     int budget, const Finisher& finish)
{
    Subgradient sg = subgradient(pr.spec, x);
    const double g0 = sg.g.norm();
    if (g0 == 0.0) return false;
    // Step scale: f >= 0 and convexity put the minimizer within roughly
    // f(x0) / ||g0|| of the start along the first subgradient.
    const double c = std::max(pr.value(x) / g0, 1e-3 * (1.0 + x.norm()));
    Vector avg = x;
    double weight_sum = 0.0;
    for (int k = 1; k <= budget; ++k) {
        const double gn = sg.g.norm();
        if (gn == 0.0) break;
        const double step = c / std::sqrt(static_cast<double>(k));
        x -= (step / gn) * sg.g;
        weight_sum += step;
        avg += (step / weight_sum) * (x - avg);
        const double fx = pr.value(x);
        const double fa = pr.value(avg);
        if (fa < fx) tr.record(avg, fa);
        else tr.record(x, fx);
        if (finish && tr.trace.size() % kFinishEvery == 0 && finish()) return true;
        if (k > opts.window && tr.recent_change(opts.window) <= opts.tol_rel_obj) break;
        sg = subgradient(pr.spec, x);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Active-set polishing

struct Pieces {
    std::vector<char> zero_block;
    IndexSet zero_res;
    bool operator==(const Pieces&) const = default;
};

Pieces identify(const Problem& pr, const Vector& x, const Vector& r, double tau)
{
    Pieces s;
    s.zero_block.assign(static_cast<std::size_t>(pr.pb.size()), 0);
    const double xmax = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
    double pen = 0.0;
    for (Index l = 0; l < pr.pb.size(); ++l) {
        const double nb = pr.pb.block_norm(x, l);
        if (pr.delta > 0.0 && nb <= tau * (1.0 + xmax)) {
            s.zero_block[static_cast<std::size_t>(l)] = 1;
        } else {
            pen += pr.pb.inv_weight[l] * nb;
        }
    }
    if (pr.delta * pen > 0.0) {
        const double tol = tau * (1.0 + pr.Y.cwiseAbs().maxCoeff());
        for (Index i = 0; i < pr.n; ++i)
            if (std::abs(r[i]) <= tol) s.zero_res.push_back(i);
    }
    return s;
}

// Minimizes the loss restricted to one smooth piece: coefficients outside
// the active blocks fixed at zero, residuals in zero_res constrained to zero,
// the signs of the remaining residuals (and, for l1, of the coefficients)
// frozen at their current values.
class PieceNewton {
public:
    PieceNewton(const Problem& pr, const Vector& x, const Vector& r, const Pieces& pieces)
        : pr_(pr), pieces_(pieces)
    {
        for (Index l = 0; l < pr.pb.size(); ++l) {
            if (pieces.zero_block[static_cast<std::size_t>(l)]) continue;
            Block b;
            b.inv_weight = pr.pb.inv_weight[l];
            for (Index j : pr.pb.blocks[static_cast<std::size_t>(l)]) {
                b.local.push_back(static_cast<Index>(cols_.size()));
                cols_.push_back(j);
                b.sign.push_back(x[j] < 0.0 ? -1.0 : 1.0);
            }
            blocks_.push_back(std::move(b));
        }
        m_ = static_cast<Index>(cols_.size());
        std::vector<char> is_zero(static_cast<std::size_t>(pr.n), 0);
        for (Index i : pieces.zero_res) is_zero[static_cast<std::size_t>(i)] = 1;
        for (Index i = 0; i < pr.n; ++i) {
            if (!is_zero[static_cast<std::size_t>(i)]) {
                rows_.push_back(i);
                sigma_.push_back(r[i] < 0.0 ? -1.0 : 1.0);
            }
        }
        k_ = static_cast<Index>(pieces.zero_res.size());
        XT_.resize(pr.n, m_);
        for (Index c = 0; c < m_; ++c) XT_.col(c) = pr.X.col(cols_[static_cast<std::size_t>(c)]);
        SX_.resize(static_cast<Index>(rows_.size()), m_);
        for (std::size_t t = 0; t < rows_.size(); ++t)
            SX_.row(static_cast<Index>(t)) = sigma_[t] * XT_.row(rows_[t]);
    }

    Vector solve(const Vector& x) const
    {
        Vector full = Vector::Zero(pr_.p);
        if (m_ == 0) return full;
        Vector b(m_);
        for (Index c = 0; c < m_; ++c) b[c] = x[cols_[static_cast<std::size_t>(c)]];

        Matrix N;
        if (k_ > 0) {
            Matrix C(k_, m_);
            Vector d(k_);
            for (Index t = 0; t < k_; ++t) {
                const Index i = pieces_.zero_res[static_cast<std::size_t>(t)];
                C.row(t) = XT_.row(i);
                d[t] = pr_.Y[i];
            }
            b += C.completeOrthogonalDecomposition().solve(d - C * b);
            Eigen::FullPivHouseholderQR<Matrix> qr(C.transpose());
            const Index rank = qr.rank();
            const Matrix Q = qr.matrixQ();
            N = Q.rightCols(m_ - rank);
        } else {
            N = Matrix::Identity(m_, m_);
        }

        if (N.cols() > 0) {
            Vector grad;
            Matrix H;
            for (int it = 0; it < kNewtonIters; ++it) {
                const double F = evaluate(b, &grad, &H);
                const Vector gN = N.transpose() * grad;
                if (gN.norm() == 0.0) break;
                const Matrix HN = N.transpose() * H * N;
                Vector u = -HN.completeOrthogonalDecomposition().solve(gN);
                Vector step = N * u;
                double slope = grad.dot(step);
                if (!(slope < 0.0) || !step.allFinite()) {
                    step = -(N * gN);
                    slope = -gN.squaredNorm();
                }
                // Newton decrement below rounding level of F: done.
                if (-slope <= 1e-17 * std::max(F, 1e-300)) break;
                double s = 1.0;
                bool accepted = false;
                for (int ls = 0; ls < 60; ++ls) {
                    const double Fs = evaluate(b + s * step, nullptr, nullptr);
                    if (Fs <= F + 1e-4 * s * slope) {
                        accepted = true;
                        break;
                    }
                    s *= 0.5;
                }
                if (!accepted) break;
                b += s * step;
                if (s * step.norm() <= 1e-15 * (1.0 + b.norm())) break;
            }
        }
        for (Index c = 0; c < m_; ++c) full[cols_[static_cast<std::size_t>(c)]] = b[c];
        return full;
    }

private:
    struct Block {
        IndexSet local;
        std::vector<double> sign;
        double inv_weight = 1.0;
    };

    double evaluate(const Vector& b, Vector* grad, Matrix* H) const
    {
        const double delta = pr_.delta;
        const double inv_n = 1.0 / static_cast<double>(pr_.n);
        double P = 0.0;
        Vector dP = Vector::Zero(m_);
        std::vector<double> norms(blocks_.size(), 0.0);
        for (std::size_t q = 0; q < blocks_.size(); ++q) {
            const auto& blk = blocks_[q];
            if (pr_.pb.l1) {
                const Index c = blk.local.front();
                P += blk.sign.front() * b[c];
                dP[c] = blk.sign.front();
            } else {
                double sq = 0.0;
                for (Index c : blk.local) sq += b[c] * b[c];
                const double nb = std::sqrt(sq);
                norms[q] = nb;
                P += blk.inv_weight * nb;
                if (nb > 0.0)
                    for (Index c : blk.local) dP[c] = blk.inv_weight * b[c] / nb;
            }
        }
        const double a = delta * P;
        const Index rows = static_cast<Index>(rows_.size());
        Vector e(rows);
        double F = 0.0;
        double E = static_cast<double>(k_) * a;
        const Vector fitted = XT_ * b;
        for (Index t = 0; t < rows; ++t) {
            const Index i = rows_[static_cast<std::size_t>(t)];
            const double ri = fitted[i] - pr_.Y[i];
            e[t] = sigma_[static_cast<std::size_t>(t)] * ri + a;
            F += e[t] * e[t];
            E += e[t];
        }
        F += static_cast<double>(k_) * a * a;
        if (grad) {
            *grad = SX_.transpose() * e + (delta * E) * dP;
            Matrix M = SX_;
            M.rowwise() += (delta * dP).transpose();
            H->setZero(m_, m_);
            // Eigen's blocking heuristic divides by the depth, so skip empty updates.
            if (M.rows() > 0) {
                H->selfadjointView<Eigen::Lower>().rankUpdate(M.transpose());
                *H = H->selfadjointView<Eigen::Lower>();
            }
            *H += (static_cast<double>(k_) * delta * delta) * dP * dP.transpose();
            if (!pr_.pb.l1) {
                for (std::size_t q = 0; q < blocks_.size(); ++q) {
                    const auto& blk = blocks_[q];
                    const double nb = norms[q];
                    if (nb == 0.0) continue;
                    const double c = delta * E * blk.inv_weight / nb;
                    for (Index u : blk.local) {
                        for (Index v : blk.local) {
                            const double uu = b[u] / nb;
                            const double vv = b[v] / nb;
                            (*H)(u, v) += c * ((u == v ? 1.0 : 0.0) - uu * vv);
                        }
                    }
                }
            }
            *grad *= 2.0 * inv_n;
            *H *= 2.0 * inv_n;
        }
        return F * inv_n;
    }

    const Problem& pr_;
    const Pieces& pieces_;
    std::vector<Block> blocks_;
    IndexSet cols_;
    IndexSet rows_;
    std::vector<double> sigma_;
    Matrix XT_;
    Matrix SX_;  // sign-adjusted rows of XT_ off the zero-residual set
    Index m_ = 0;
    Index k_ = 0;
};

struct LinePoint {
    Vector x;
    double f = kInf;
};

// Exact minimization of t -> f(x + t d) over [0, t_hi] (t_hi <= 0 means
// "find a bracket"). The loss is convex and smooth between kinks, so all kinks
// are evaluated and the best neighbouring pieces refined.
LinePoint line_search(const Problem& pr, const Vector& x, const Vector& r, const Vector& d,
                      double t_hi)
{
    Vector Xd;
    kernels::gemv(pr.X, d, Xd);
    Vector rt(pr.n);
    Vector xt(pr.p);
    auto phi = [&](double t) {
        rt = r + t * Xd;
        xt = x + t * d;
        return pr.value_from(rt, pr.pb.value(xt));
    };
    const double f0 = pr.value_from(r, pr.pb.value(x));

    if (t_hi <= 0.0) {
        const double dn = d.norm();
        if (dn == 0.0) return {x, f0};
        double t = std::max(1e-12, 1e-3 * (1.0 + x.norm()) / dn);
        double ft = phi(t);
        if (ft >= f0) {
            t_hi = t;
        } else {
            for (int k = 0; k < 80; ++k) {
                const double f4 = phi(4.0 * t);
                t *= 4.0;
                if (f4 >= ft) break;
                ft = f4;
            }
            t_hi = t;
        }
    }

    struct Kink {
        double t;
        Index block;  // -1 for a residual kink
    };
    std::vector<Kink> kinks;
    for (Index i = 0; i < pr.n; ++i) {
        if (Xd[i] == 0.0) continue;
        const double t = -r[i] / Xd[i];
        if (t > 0.0 && t < t_hi) kinks.push_back({t, -1});
    }
    if (pr.delta > 0.0) {
        for (Index l = 0; l < pr.pb.size(); ++l) {
            const auto& blk = pr.pb.blocks[static_cast<std::size_t>(l)];
            double xd = 0.0;
            double dd = 0.0;
            double xx = 0.0;
            for (Index j : blk) {
                xd += x[j] * d[j];
                dd += d[j] * d[j];
                xx += x[j] * x[j];
            }
            if (dd == 0.0 || xx == 0.0) continue;
            const double t = -xd / dd;
            if (!(t > 0.0 && t < t_hi)) continue;
            double rem = 0.0;
            for (Index j : blk) rem += (x[j] + t * d[j]) * (x[j] + t * d[j]);
            if (rem <= 1e-20 * xx) kinks.push_back({t, l});
        }
    }
    std::sort(kinks.begin(), kinks.end(), [](const Kink& a, const Kink& b) { return a.t < b.t; });

    std::vector<double> ts = {0.0};
    std::vector<Index> kind = {-1};
    for (const auto& k : kinks) {
        if (k.t > ts.back()) {
            ts.push_back(k.t);
            kind.push_back(k.block);
        }
    }
    if (t_hi > ts.back()) {
        ts.push_back(t_hi);
        kind.push_back(-1);
    }
    std::vector<double> fs(ts.size());
    fs[0] = f0;
    std::size_t best = 0;
    for (std::size_t q = 1; q < ts.size(); ++q) {
        fs[q] = phi(ts[q]);
        if (fs[q] < fs[best]) best = q;
    }
    // A kink a hair away from the start can tie f0 to rounding; the minimizer
    // then sits further out, so step past ties before bracketing.
    const double tie = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(fs[best]);
    while (best + 1 < ts.size() && fs[best + 1] <= fs[best] + tie) ++best;

    double t_best = ts[best];
    double f_best = fs[best];
    bool at_kink = best > 0 && kind[best] >= 0;
    auto refine = [&](std::size_t lo, std::size_t hi) {
        double a = ts[lo];
        double b = ts[hi];
        // Parabola through the endpoints and the midpoint is exact on a
        // quadratic piece.
        const double m = 0.5 * (a + b);
        const double fa = fs[lo];
        const double fb = fs[hi];
        const double fm = phi(m);
        if (fm < f_best) {
            f_best = fm;
            t_best = m;
            at_kink = false;
        }
        const double denom = fa - 2.0 * fm + fb;
        if (denom > 0.0) {
            const double h = 0.5 * (b - a);
            const double tv = m + 0.5 * h * (fa - fb) / denom;
            if (tv > a && tv < b) {
                const double fv = phi(tv);
                if (fv < f_best) {
                    f_best = fv;
                    t_best = tv;
                    at_kink = false;
                }
            }
        }
        // Golden section as a safeguard for non-quadratic pieces.
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = b - gr * (b - a);
        double e = a + gr * (b - a);
        double fc = phi(c);
        double fe = phi(e);
        for (int it = 0; it < 80 && (b - a) > 1e-16 * (1.0 + std::abs(b)); ++it) {
            if (fc < fe) {
                b = e;
                e = c;
                fe = fc;
                c = b - gr * (b - a);
                fc = phi(c);
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + gr * (b - a);
                fe = phi(e);
            }
        }
        for (const auto& [tt, ff] : {std::pair{c, fc}, std::pair{e, fe}}) {
            if (ff < f_best) {
                f_best = ff;
                t_best = tt;
                at_kink = false;
            }
        }
    };
    if (best > 0) refine(best - 1, best);
    if (best + 1 < ts.size()) refine(best, best + 1);

    LinePoint out{x + t_best * d, f_best};
    if (at_kink) {
        // Land exactly on the kink: zero every block that vanishes here.
        for (const auto& k : kinks) {
            if (k.block >= 0 && k.t == t_best) {
                for (Index j : pr.pb.blocks[static_cast<std::size_t>(k.block)]) out.x[j] = 0.0;
            }
        }
        out.f = pr.value(out.x);
    }
    return out;
}

Index active_count(const Problem& pr, const Vector& x)
{
    const double tol = 1e-7 * (1.0 + (x.size() ? x.cwiseAbs().maxCoeff() : 0.0));
    Index m = 0;
    for (Index l = 0; l < pr.pb.size(); ++l)
        if (pr.pb.block_norm(x, l) > tol) m += static_cast<Index>(pr.pb.blocks[static_cast<std::size_t>(l)].size());
    return m;
}

struct PolishOutcome {
    bool certified = false;
    int iters = 0;
};

PolishOutcome polish(const Problem& pr, const SolverOptions& opts, Tracker& tr, int max_iters)
{
    const std::vector<double> ladder = {1e-4, 1e-8, 1e-11};
    PolishOutcome out;
    Vector x = tr.best_x;
    double fx = tr.best_f;
    Vector r;
    bool just_certified = false;

    for (int it = 0; it < max_iters; ++it) {
        ++out.iters;
        pr.residuals(x, r);
        const double f_start = fx;

        // Newton on the piece identified at several thresholds.
        std::vector<Pieces> tried;
        for (double tau : ladder) {
            Pieces pieces = identify(pr, x, r, tau);
            if (std::find(tried.begin(), tried.end(), pieces) != tried.end()) continue;
            const Vector xn = PieceNewton(pr, x, r, pieces).solve(x);
            tried.push_back(std::move(pieces));
            if (!xn.allFinite()) continue;
            const double fn = pr.value(xn);
            if (fn < fx) {
                x = xn;
                fx = fn;
            } else {
                const LinePoint lp = line_search(pr, x, r, xn - x, 1.0);
                if (lp.f < fx) {
                    x = lp.x;
                    fx = lp.f;
                }
            }
            pr.residuals(x, r);
        }
        tr.record(x, fx);

        const MinNormSubgradient cert = min_norm_subgradient(pr.spec, x);
        const bool small = cert.norm < opts.tol_cert;
        const double gain = (f_start - fx) / std::max(std::abs(fx), 1e-300);
        if (small && (just_certified || gain <= opts.tol_rel_obj)) {
            out.certified = gain <= opts.tol_rel_obj;
            if (out.certified) break;
        }
        just_certified = small;
        if (small) continue;  // one confirming Newton pass

        // Steepest descent along the minimum-norm subgradient.
        const LinePoint lp = line_search(pr, x, r, -cert.g, 0.0);
        if (lp.f < fx) {
            x = lp.x;
            fx = lp.f;
            tr.record(x, fx);
        } else if (fx >= f_start) {
            break;  // neither step made progress
        }
    }
    return out;
}

}  // namespace

FitResult fit(const AdvObjectiveSpec& spec, const SolverOptions& opts)
{
    spec.validate();
    opts.validate();
    const Problem pr(spec);

    Vector x0 = Vector::Zero(spec.p());
    if (opts.warm_start) {
        if (opts.warm_start->size() != spec.p()) {
            throw InvalidArgument("fit: warm start has wrong dimension");
        }
        x0 = *opts.warm_start;
    }
    Tracker tr(pr, x0, pr.value(x0));
    tr.trace.push_back(tr.best_f);

    // Interleave short polishing attempts with the first-order stage; once
    // the active pieces are right, Newton finishes far faster than smoothing.
    PolishOutcome pol;
    Finisher finish;
    if (opts.polish) {
        finish = [&] {
            if (active_count(pr, tr.best_x) > pr.n) return false;
            pol = polish(pr, opts, tr, std::min(10, opts.max_polish_iters));
            return pol.certified;
        };
    }
    bool done = finish && finish();
    if (!done) {
        done = opts.step_rule == StepRule::backtracking
                   ? run_accelerated(pr, x0, opts, tr, opts.max_iters, finish)
                   : run_subgradient(pr, x0, opts, tr, opts.max_iters, finish);
    }
    if (opts.polish && !done) pol = polish(pr, opts, tr, opts.max_polish_iters);

    FitResult res;
    res.beta_hat = tr.best_x;
    res.objective = pr.value(res.beta_hat);
    if (std::isnan(res.objective)) throw NumericalFailure("fit: objective evaluated to NaN");
    res.certificate = min_norm_subgradient(spec, res.beta_hat).norm;
    const bool stalled = opts.polish ? pol.certified : tr.recent_change(opts.window) <= opts.tol_rel_obj;
    res.iters = static_cast<int>(tr.trace.size()) - 1;
    res.trace = std::move(tr.trace);
    res.converged = stalled && res.certificate < opts.tol_cert;
    return res;
}

FitResult brute_force_fit(const AdvObjectiveSpec& spec, double box_radius, int grid_points_per_dim)
{
    spec.validate();
    const Index p = spec.p();
    if (p > 3) throw InvalidArgument("brute_force_fit: refusing p > 3 (grid grows as G^p)");
    if (grid_points_per_dim < 2 || !(box_radius > 0.0)) {
        throw InvalidArgument("brute_force_fit: need at least 2 grid points and a positive radius");
    }
    const auto G = static_cast<long long>(grid_points_per_dim);
    long long total = 1;
    for (Index j = 0; j < p; ++j) total *= G;
    const double step = 2.0 * box_radius / static_cast<double>(G - 1);
    const auto& X = spec.data->X;
    const auto& Y = spec.data->Y;
    const Index n = spec.n();
    const double delta = spec.delta;
    const PenaltyBlocks pb = PenaltyBlocks::from(spec);

    double best_f = kInf;
    long long best_idx = 0;
#pragma omp parallel
    {
        double local_f = kInf;
        long long local_idx = 0;
        Vector beta(p);
#pragma omp for schedule(static)
        for (long long idx = 0; idx < total; ++idx) {
            long long rem = idx;
            for (Index j = 0; j < p; ++j) {
                beta[j] = -box_radius + step * static_cast<double>(rem % G);
                rem /= G;
            }
            const double a = delta * pb.value(beta);
            double acc = 0.0;
            for (Index i = 0; i < n; ++i) {
                double ri = -Y[i];
                for (Index j = 0; j < p; ++j) ri += X(i, j) * beta[j];
                const double t = std::abs(ri) + a;
                acc += t * t;
            }
            const double f = acc / static_cast<double>(n);
            if (f < local_f) {
                local_f = f;
                local_idx = idx;
            }
        }
#pragma omp critical
        {
            if (local_f < best_f || (local_f == best_f && local_idx < best_idx)) {
                best_f = local_f;
                best_idx = local_idx;
            }
        }
    }

    FitResult res;
    res.beta_hat.resize(p);
    long long rem = best_idx;
    for (Index j = 0; j < p; ++j) {
        res.beta_hat[j] = -box_radius + step * static_cast<double>(rem % G);
        rem /= G;
    }
    res.objective = dual_adv_loss(spec, res.beta_hat);
    res.certificate = min_norm_subgradient(spec, res.beta_hat).norm;
    res.iters = static_cast<int>(std::min<long long>(total, std::numeric_limits<int>::max()));
    res.trace = {res.objective};
    res.converged = false;
    return res;
}

std::vector<FitResult> coefficient_path(const AdvObjectiveSpec& base,
                                        const std::vector<double>& deltas,
                                        const SolverOptions& opts)
{
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        if (!(deltas[k] > 0.0)) throw InvalidArgument("coefficient_path: deltas must be positive");
        if (k > 0 && !(deltas[k] > deltas[k - 1])) {
            throw InvalidArgument("coefficient_path: deltas must be strictly ascending");
        }
    }
    std::vector<FitResult> path;
    SolverOptions o = opts;
    for (double d : deltas) {
        path.push_back(fit(base.with_delta(d), o));
        o.warm_start = path.back().beta_hat;
    }
    return path;
}

std::vector<double> log_grid(double lo, double hi, int count)
{
    if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw InvalidArgument("log_grid: bad range");
    std::vector<double> g(static_cast<std::size_t>(count));
    if (count == 1) {
        g[0] = lo;
        return g;
    }
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (int k = 0; k < count; ++k) g[static_cast<std::size_t>(k)] = std::exp(a + (b - a) * k / (count - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

}  // namespace advreg
