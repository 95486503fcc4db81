#include "advreg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace advreg {

PredictionError prediction_error(const Dataset& data, const Vector& beta_hat, const Vector& beta_star)
{
    if (beta_hat.size() != data.p() || beta_star.size() != data.p()) {
        throw InvalidArgument("prediction_error: dimension mismatch");
    }
    const double sq = (data.X * (beta_hat - beta_star)).squaredNorm();
    const double n = static_cast<double>(data.n());
    return {sq / (2.0 * n), sq / n};
}

const char* to_string(ReKind k) { return k == ReKind::re ? "RE" : "GRE"; }

const char* to_string(ReMode m)
{
    return m == ReMode::exact_orthonormal ? "exact-orthonormal" : "sampled-upper-estimate";
}

bool is_orthonormal_design(const Matrix& X, double tol)
{
    if (X.rows() == 0) return false;
    const Matrix G = X.transpose() * X / static_cast<double>(X.rows());
    return (G - Matrix::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() <= tol;
}

bool blocks_orthonormal(const Matrix& X, const GroupPartition& partition, double tol)
{
    if (X.cols() != partition.dimension()) {
        throw InvalidArgument("blocks_orthonormal: partition does not match X");
    }
    const double n = static_cast<double>(X.rows());
    for (const auto& grp : partition.groups()) {
        Matrix XG(X.rows(), static_cast<Index>(grp.size()));
        for (std::size_t t = 0; t < grp.size(); ++t) XG.col(static_cast<Index>(t)) = X.col(grp[t]);
        const Matrix psi = XG.transpose() * XG / n;
        if ((psi - Matrix::Identity(psi.rows(), psi.cols())).cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
}

namespace {

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Cone over blocks: sum_{out} iw_l ||v^l|| <= c * sum_{in} iw_l ||v^l||.
// The ratio denominator is ||v_D|| with D = all coordinates (RE) or the
// support blocks (GRE).
struct ConeEngine {
    Matrix G;  // X^T X / n
    std::vector<IndexSet> blocks;
    Vector iw;
    double c = 0.0;
    bool denom_on_support = false;
    int samples = 0;
    int refine_iters = 0;

    struct Support {
        std::vector<char> in_block;
        std::vector<char> in_coord;
        IndexSet in_coords;
        IndexSet out_coords;
    };

    Support make_support(const IndexSet& J) const
    {
        Support S;
        S.in_block.assign(blocks.size(), 0);
        S.in_coord.assign(static_cast<std::size_t>(G.rows()), 0);
        for (Index l : J) S.in_block[static_cast<std::size_t>(l)] = 1;
        for (std::size_t l = 0; l < blocks.size(); ++l) {
            for (Index j : blocks[l]) {
                S.in_coord[static_cast<std::size_t>(j)] = S.in_block[l];
                (S.in_block[l] ? S.in_coords : S.out_coords).push_back(j);
            }
        }
        return S;
    }

    double denom_sq(const Support& S, const Vector& v) const
    {
        if (!denom_on_support) return v.squaredNorm();
        double acc = 0.0;
        for (Index j : S.in_coords) acc += v[j] * v[j];
        return acc;
    }

    double rayleigh(const Support& S, const Vector& v) const
    {
        const double d = denom_sq(S, v);
        if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
        return std::max(0.0, v.dot(G * v)) / d;
    }

    // Shrinks the off-support part until v is in the cone.
    void into_cone(const Support& S, Vector& v) const
    {
        double in = 0.0;
        double out = 0.0;
        for (std::size_t l = 0; l < blocks.size(); ++l) {
            double sq = 0.0;
            for (Index j : blocks[l]) sq += v[j] * v[j];
            (S.in_block[l] ? in : out) += iw[static_cast<Index>(l)] * std::sqrt(sq);
        }
        if (out <= c * in) return;
        const double scale = out > 0.0 ? c * in / out : 0.0;
        for (Index j : S.out_coords) v[j] *= scale;
    }

    struct Result {
        double q = std::numeric_limits<double>::infinity();
        int evaluated = 0;
    };

    Result run(const IndexSet& J, std::uint64_t seed) const
    {
        const Support S = make_support(J);
        const Index p = G.rows();
        Result res;
        auto consider = [&](double q) {
            ++res.evaluated;
            if (q < res.q) res.q = q;
        };

        // Weight of the block containing each coordinate.
        std::vector<double> coord_iw(static_cast<std::size_t>(p), 1.0);
        for (std::size_t l = 0; l < blocks.size(); ++l)
            for (Index j : blocks[l]) coord_iw[static_cast<std::size_t>(j)] = iw[static_cast<Index>(l)];

        // Pair directions e_j + t e_k, evaluated in closed form.
        for (Index j : S.in_coords) {
            for (Index k = 0; k < p; ++k) {
                if (k == j) continue;
                const bool k_in = S.in_coord[static_cast<std::size_t>(k)];
                double tmax = 1.0;
                if (!k_in) {
                    tmax = std::min(1.0, c * coord_iw[static_cast<std::size_t>(j)] /
                                             coord_iw[static_cast<std::size_t>(k)]);
                    if (!(tmax > 0.0)) continue;
                }
                for (double t : {tmax, -tmax}) {
                    const double num = G(j, j) + 2.0 * t * G(j, k) + t * t * G(k, k);
                    const double den = 1.0 + ((k_in || !denom_on_support) ? t * t : 0.0);
                    consider(std::max(0.0, num) / den);
                }
            }
        }

        // Smallest eigenvector of the Gram matrix on the support.
        const Index m = static_cast<Index>(S.in_coords.size());
        Vector best_v = Vector::Zero(p);
        double best_q = std::numeric_limits<double>::infinity();
        {
            Matrix GS(m, m);
            for (Index a = 0; a < m; ++a)
                for (Index b = 0; b < m; ++b)
                    GS(a, b) = G(S.in_coords[static_cast<std::size_t>(a)], S.in_coords[static_cast<std::size_t>(b)]);
            Eigen::SelfAdjointEigenSolver<Matrix> es(GS);
            Vector v = Vector::Zero(p);
            for (Index a = 0; a < m; ++a) v[S.in_coords[static_cast<std::size_t>(a)]] = es.eigenvectors()(a, 0);
            const double q = rayleigh(S, v);
            consider(q);
            best_q = q;
            best_v = v;
        }

        // Random cone vectors: Gaussian on the support plus a sparse
        // off-support part filling a random fraction of the cone budget.
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> unif;
        const std::size_t n_out = S.out_coords.size();
        for (int k = 0; k < samples; ++k) {
            Vector v = Vector::Zero(p);
            for (Index j : S.in_coords) v[j] = normal(rng);
            if (n_out > 0) {
                const std::size_t spread = std::min<std::size_t>(n_out, std::max<std::size_t>(1, S.in_coords.size()));
                std::uniform_int_distribution<std::size_t> pick(0, n_out - 1);
                for (std::size_t t = 0; t < spread; ++t) v[S.out_coords[pick(rng)]] = normal(rng);
                // Scale the outside so that it uses a fraction u of the budget.
                double in = 0.0;
                double out = 0.0;
                for (std::size_t l = 0; l < blocks.size(); ++l) {
                    double sq = 0.0;
                    for (Index j : blocks[l]) sq += v[j] * v[j];
                    (S.in_block[l] ? in : out) += iw[static_cast<Index>(l)] * std::sqrt(sq);
                }
                const double scale = out > 0.0 ? unif(rng) * c * in / out : 0.0;
                for (Index j : S.out_coords) v[j] *= scale;
            }
            const double q = rayleigh(S, v);
            consider(q);
            if (q < best_q) {
                best_q = q;
                best_v = v;
            }
        }

        // Projected-gradient refinement of the best candidate. The first step
        // is scaled by the Gram diagonal so the estimate is homogeneous in X.
        double eta = 1.0 / std::max(G.diagonal().maxCoeff(), 1e-300);
        Vector v = best_v;
        double q = best_q;
        for (int it = 0; it < refine_iters && std::isfinite(q); ++it) {
            const double d = denom_sq(S, v);
            Vector pd = v;
            if (denom_on_support)
                for (Index j : S.out_coords) pd[j] = 0.0;
            const Vector grad = 2.0 * (G * v - q * pd) / d;
            Vector cand = v - eta * grad;
            into_cone(S, cand);
            const double qc = rayleigh(S, cand);
            consider(qc);
            if (qc < q) {
                v = cand / std::max(cand.norm(), 1e-300);
                q = qc;
                eta *= 1.5;
            } else {
                eta *= 0.5;
            }
        }
        return res;
    }
};

bool next_combination(IndexSet& comb, Index n)
{
    const Index k = static_cast<Index>(comb.size());
    for (Index i = k - 1; i >= 0; --i) {
        if (comb[static_cast<std::size_t>(i)] < n - k + i) {
            ++comb[static_cast<std::size_t>(i)];
            for (Index j = i + 1; j < k; ++j) comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
            return true;
        }
    }
    return false;
}

ReEstimate estimate(const Matrix& X, ConeEngine engine, Index size, Index coords_total,
                    ReKind kind, const ReOptions& opts)
{
    ReEstimate est;
    est.kind = kind;
    est.size = size;
    est.cone = engine.c;
    est.seed = opts.seed;
    if (is_orthonormal_design(X, opts.orthonormal_tol)) {
        // ||Xv||^2 = n ||v||^2, and ||v|| / ||v_D|| >= 1 with equality on D.
        est.value = 1.0;
        est.mode = ReMode::exact_orthonormal;
        return est;
    }
    est.mode = ReMode::sampled_upper_estimate;

    const Index B = static_cast<Index>(engine.blocks.size());
    // The cones are nested in the support, and the GRE denominator grows
    // with it, so supports of the maximal size suffice.
    const Index k = std::min(size, B);
    std::vector<IndexSet> supports;
    if (coords_total <= 12) {
        IndexSet comb(static_cast<std::size_t>(k));
        for (Index i = 0; i < k; ++i) comb[static_cast<std::size_t>(i)] = i;
        do supports.push_back(comb);
        while (next_combination(comb, B));
        est.supports_enumerated = true;
    } else {
        std::mt19937_64 rng(splitmix(opts.seed));
        IndexSet all(static_cast<std::size_t>(B));
        for (Index i = 0; i < B; ++i) all[static_cast<std::size_t>(i)] = i;
        for (int t = 0; t < opts.max_supports; ++t) {
            std::shuffle(all.begin(), all.end(), rng);
            IndexSet J(all.begin(), all.begin() + k);
            std::sort(J.begin(), J.end());
            supports.push_back(std::move(J));
        }
    }
    est.supports = static_cast<Index>(supports.size());

    std::vector<ConeEngine::Result> results(supports.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t t = 0; t < supports.size(); ++t) {
        results[t] = engine.run(supports[t], splitmix(opts.seed ^ splitmix(t + 1)));
    }
    double q = std::numeric_limits<double>::infinity();
    for (const auto& r : results) {
        q = std::min(q, r.q);
        est.samples += r.evaluated;
    }
    est.value = std::sqrt(q);
    return est;
}

}  // namespace

ReEstimate re_constant(const Matrix& X, Index s, double c1, const ReOptions& opts)
{
    const Index p = X.cols();
    if (s < 1 || s > p) throw InvalidArgument("re_constant: need 1 <= s <= p");
    if (!(c1 >= 0.0)) throw InvalidArgument("re_constant: c1 must be non-negative");
    ConeEngine engine;
    engine.G = X.transpose() * X / static_cast<double>(X.rows());
    engine.blocks.resize(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) engine.blocks[static_cast<std::size_t>(j)] = {j};
    engine.iw = Vector::Ones(p);
    engine.c = c1;
    engine.denom_on_support = false;
    engine.samples = opts.samples_per_support;
    engine.refine_iters = opts.refine_iters;
    return estimate(X, std::move(engine), s, p, ReKind::re, opts);
}

ReEstimate gre_constant(const Matrix& X, const GroupPartition& partition, Index g, double c2,
                        const ReOptions& opts)
{
    if (X.cols() != partition.dimension()) throw InvalidArgument("gre_constant: partition does not match X");
    const Index L = partition.num_groups();
    if (g < 1 || g > L) throw InvalidArgument("gre_constant: need 1 <= g <= L");
    if (!(c2 >= 0.0)) throw InvalidArgument("gre_constant: c2 must be non-negative");
    ConeEngine engine;
    engine.G = X.transpose() * X / static_cast<double>(X.rows());
    engine.blocks = partition.groups();
    engine.iw = partition.weights().cwiseInverse();
    engine.c = c2;
    engine.denom_on_support = true;
    engine.samples = opts.samples_per_support;
    engine.refine_iters = opts.refine_iters;
    return estimate(X, std::move(engine), g, L, ReKind::gre, opts);
}

// ---------------------------------------------------------------------------

const char* to_string(BoundForm f)
{
    switch (f) {
    case BoundForm::theorem: return "theorem";
    case BoundForm::corollary_highprob: return "corollary-highprob";
    case BoundForm::corollary_simplified: return "corollary-simplified";
    }
    return "?";
}

BoundForm parse_bound_form(const std::string& s)
{
    if (s == "theorem") return BoundForm::theorem;
    if (s == "corollary-highprob") return BoundForm::corollary_highprob;
    if (s == "corollary-simplified") return BoundForm::corollary_simplified;
    throw InvalidArgument("unknown bound form '" + s + "'");
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// max{ 9/c^2 (||eps||_1/n)^2, 164 ||b*||^2 }; NaN when c = 0.
double max_term(double c, double eps_l1, Index n, double beta_l2)
{
    if (!(c > 0.0)) return kNaN;
    const double e = eps_l1 / static_cast<double>(n);
    return std::max(9.0 / (c * c) * e * e, 164.0 * beta_l2 * beta_l2);
}

}  // namespace

BoundReport bound_classic(const ClassicBoundInputs& in, BoundForm form)
{
    if (in.n < 1 || in.p < 1 || in.s < 0) throw InvalidArgument("bound_classic: bad dimensions");
    BoundReport rep;
    rep.variant = Variant::classic;
    rep.form = form;
    rep.inputs = {{"s", in.s},           {"p", in.p},
                  {"n", in.n},           {"delta", in.delta},
                  {"gamma", in.gamma},   {"eps_l1_over_n", in.eps_l1 / static_cast<double>(in.n)},
                  {"beta_star_l2", in.beta_star_l2}, {"sigma", in.sigma}};
    const double s = static_cast<double>(in.s);
    const double log_rate = s * std::log(static_cast<double>(in.p)) / static_cast<double>(in.n);
    switch (form) {
    case BoundForm::theorem: {
        rep.rate = 3.0 * in.delta * in.delta * s;
        if (rep.rate == 0.0) {
            rep.bound = 0.0;
            rep.note = "delta = 0: the oracle condition fails unless X^T eps = 0";
            break;
        }
        rep.bound = rep.rate * max_term(in.gamma, in.eps_l1, in.n, in.beta_star_l2);
        break;
    }
    case BoundForm::corollary_highprob:
        rep.rate = 192.0 * log_rate;
        rep.bound = rep.rate * max_term(in.gamma, in.eps_l1, in.n, in.beta_star_l2);
        rep.note = "1/(2n) error scaling";
        break;
    case BoundForm::corollary_simplified:
        rep.rate = 192.0 * log_rate;
        rep.R = 2.0 * std::sqrt(41.0) * in.beta_star_l2;
        rep.bound = rep.rate * rep.R * rep.R;
        if (in.gamma > 0.0) {
            rep.sigma_condition = in.sigma < in.gamma * rep.R / 6.0;
            rep.applicable = *rep.sigma_condition;
        } else {
            rep.applicable = false;
        }
        rep.note = "R taken at its lower limit 2 sqrt(41) ||beta*||_2";
        break;
    }
    rep.defined = !std::isnan(rep.bound);
    rep.inputs["R"] = rep.R;
    return rep;
}

BoundReport bound_group(const GroupBoundInputs& in, BoundForm form)
{
    if (in.n < 1 || in.L < 1 || in.g < 0) throw InvalidArgument("bound_group: bad dimensions");
    if (in.omega_J.size() != in.g) throw InvalidArgument("bound_group: need one weight per support group");
    BoundReport rep;
    rep.variant = Variant::group;
    rep.form = form;
    double inv_w2 = 0.0;
    for (Index l = 0; l < in.omega_J.size(); ++l) inv_w2 += 1.0 / (in.omega_J[l] * in.omega_J[l]);
    rep.inputs = {{"g", in.g},
                  {"size_GJ", in.size_GJ},
                  {"L", in.L},
                  {"n", in.n},
                  {"delta", in.delta},
                  {"sum_inv_omega_sq", inv_w2},
                  {"kappa", in.kappa},
                  {"eps_l1_over_n", in.eps_l1 / static_cast<double>(in.n)},
                  {"beta_star_l2", in.beta_star_l2},
                  {"sigma", in.sigma},
                  {"blocks_orthonormal", in.blocks_orthonormal}};
    const double group_rate = 432.0 *
                              (static_cast<double>(in.size_GJ) +
                               static_cast<double>(in.g) * std::log(static_cast<double>(in.L))) /
                              static_cast<double>(in.n);
    switch (form) {
    case BoundForm::theorem:
        rep.rate = 3.0 * in.delta * in.delta * inv_w2;
        if (rep.rate == 0.0) {
            rep.bound = 0.0;
            rep.note = "delta = 0: the oracle condition fails unless X^T eps = 0";
            break;
        }
        rep.bound = rep.rate * max_term(in.kappa, in.eps_l1, in.n, in.beta_star_l2);
        break;
    case BoundForm::corollary_highprob:
        rep.rate = group_rate;
        rep.bound = rep.rate * max_term(in.kappa, in.eps_l1, in.n, in.beta_star_l2);
        rep.applicable = in.blocks_orthonormal;
        rep.note = "uses kappa(g,3); needs X_{G_l}^T X_{G_l}/n = I for every group";
        break;
    case BoundForm::corollary_simplified:
        rep.rate = group_rate;
        rep.R = 2.0 * std::sqrt(41.0) * in.beta_star_l2;
        rep.bound = rep.rate * rep.R * rep.R;
        if (in.kappa > 0.0) rep.sigma_condition = in.sigma < in.kappa * rep.R / 6.0;
        rep.applicable = in.blocks_orthonormal && rep.sigma_condition.value_or(false);
        rep.note = "R taken at its lower limit 2 sqrt(41) ||beta*||_2; needs orthonormal blocks";
        break;
    }
    rep.defined = !std::isnan(rep.bound);
    rep.inputs["R"] = rep.R;
    return rep;
}

void attach_empirical(BoundReport& report, const PredictionError& err)
{
    report.empirical = err;
    if (report.defined) report.dominated = err.half_mean <= report.bound;
}

namespace {

io::json number_or_null(double x)
{
    if (std::isfinite(x)) return x;
    return nullptr;
}

}  // namespace

io::json to_json(const BoundReport& r)
{
    io::json j;
    j["schema_version"] = io::kSchemaVersion;
    j["variant"] = to_string(r.variant);
    j["form"] = to_string(r.form);
    j["bound"] = number_or_null(r.bound);
    j["defined"] = r.defined;
    j["applicable"] = r.applicable;
    j["rate"] = number_or_null(r.rate);
    j["R"] = r.R;
    j["sigma_condition"] = r.sigma_condition ? io::json(*r.sigma_condition) : io::json(nullptr);
    j["inputs"] = r.inputs;
    if (r.empirical) {
        j["empirical"] = {{"half_mean", r.empirical->half_mean}, {"mean", r.empirical->mean}};
    } else {
        j["empirical"] = nullptr;
    }
    j["dominated"] = r.dominated ? io::json(*r.dominated) : io::json(nullptr);
    j["note"] = r.note;
    return j;
}

io::json to_json(const ReEstimate& e)
{
    return {{"schema_version", io::kSchemaVersion},
            {"kind", to_string(e.kind)},
            {"value", number_or_null(e.value)},
            {"mode", to_string(e.mode)},
            {"samples", e.samples},
            {"seed", e.seed},
            {"size", e.size},
            {"cone", e.cone},
            {"supports", e.supports},
            {"supports_enumerated", e.supports_enumerated}};
}

ShrinkageReport shrinkage_check(const Vector& beta_hat, const Vector& beta_star, Variant variant,
                                const std::optional<GroupPartition>& partition)
{
    if (beta_hat.size() != beta_star.size()) throw InvalidArgument("shrinkage_check: dimension mismatch");
    auto norm = [&](const Vector& b) {
        if (variant == Variant::classic) return b.lpNorm<1>();
        if (!partition) throw InvalidArgument("shrinkage_check: group variant needs a partition");
        double acc = 0.0;
        for (Index l = 0; l < partition->num_groups(); ++l)
            acc += partition->restrict(b, l).norm() / partition->weight(l);
        return acc;
    };
    ShrinkageReport r;
    r.estimate_norm = norm(beta_hat);
    r.truth_norm = norm(beta_star);
    r.holds = r.estimate_norm <= 9.0 * r.truth_norm;
    if (r.truth_norm == 0.0) {
        r.degenerate = true;
        r.ratio = r.estimate_norm == 0.0 ? kNaN : std::numeric_limits<double>::infinity();
    } else {
        r.ratio = r.estimate_norm / r.truth_norm;
    }
    return r;
}

io::json to_json(const ShrinkageReport& r)
{
    return {{"estimate_norm", r.estimate_norm},
            {"truth_norm", r.truth_norm},
            {"ratio", number_or_null(r.ratio)},
            {"degenerate", r.degenerate},
            {"holds", r.holds}};
}

}  // namespace advreg
