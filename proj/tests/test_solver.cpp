#include <doctest.h>

#include <numeric>

#include "advreg/certificate.hpp"
#include "advreg/experiment.hpp"
#include "advreg/solver.hpp"
#include "helpers.hpp"

using namespace advreg;
using th::make_data;

TEST_CASE("identity design at delta zero")
{
    Vector Y(2);
    Y << 1, 2;
    const auto r = fit(AdvObjectiveSpec::classic(make_data(Matrix::Identity(2, 2), Y), 0.0));
    CHECK(r.converged);
    CHECK((r.beta_hat - Y).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("one-dimensional grid oracle")
{
    const auto s = AdvObjectiveSpec::classic(make_data(Matrix::Ones(1, 1), Vector::Ones(1)), 0.5);
    const auto r = fit(s);
    const double grid = oracle::ols_objective_min_1d_grid(1, 1, 0.5, -2, 2, 1e-4);
    CHECK(grid == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(std::abs(r.objective - grid) < 1e-5);
}

TEST_CASE("least squares at delta zero, full rank")
{
    std::mt19937_64 rng(31);
    for (int t = 0; t < 10; ++t) {
        const Matrix X = th::gaussian(12, 4, rng);
        const Vector Y = th::gaussian(12, rng);
        const auto r = fit(AdvObjectiveSpec::classic(make_data(X, Y), 0.0));
        const Vector ls = oracle::least_squares(X, Y);
        CHECK((r.beta_hat - ls).norm() <= 1e-6 * ls.norm());
    }
}

TEST_CASE("brute force comparison and result invariants")
{
    std::mt19937_64 rng(32);
    for (int t = 0; t < 5; ++t) {
        const auto d = make_data(th::gaussian(5, 2, rng), th::gaussian(5, rng));
        const auto s = AdvObjectiveSpec::classic(d, 0.3);
        const auto r = fit(s);
        const auto bf = brute_force_fit(s, 3.0, 401);
        CHECK(r.objective <= bf.objective + 1e-4);
        CHECK(th::rel(r.objective, dual_adv_loss(s, r.beta_hat)) <= 1e-12);
        CHECK(std::is_sorted(r.trace.rbegin(), r.trace.rend()));
        CHECK(r.objective <= dual_adv_loss(s, Vector::Zero(2)));
        CHECK_FALSE(bf.converged);
    }
}

TEST_CASE("brute force grid refinement and guard")
{
    std::mt19937_64 rng(33);
    const auto s = AdvObjectiveSpec::classic(make_data(th::gaussian(4, 2, rng), th::gaussian(4, rng)), 0.2);
    // 21 points contain the 11-point grid
    CHECK(brute_force_fit(s, 2.0, 21).objective <= brute_force_fit(s, 2.0, 11).objective);
    const auto id = AdvObjectiveSpec::classic(make_data(Matrix::Identity(2, 2), Vector::Constant(2, 0.37)), 0.0);
    const auto bf = brute_force_fit(id, 1.0, 201);
    CHECK((bf.beta_hat.array() - 0.37).abs().maxCoeff() <= 0.01);
    const auto big = AdvObjectiveSpec::classic(make_data(Matrix::Identity(4, 4), Vector::Ones(4)), 0.1);
    CHECK_THROWS_AS(brute_force_fit(big, 1.0, 5), InvalidArgument);
}

TEST_CASE("certificate on converged fits, both variants and step rules")
{
    std::mt19937_64 rng(34);
    for (int t = 0; t < 6; ++t) {
        const auto d = make_data(th::gaussian(30, 12, rng), th::gaussian(30, rng));
        const auto part = GroupPartition::contiguous(12, 3);
        SolverOptions o;
        if (t % 2) o.step_rule = StepRule::diminishing;
        const auto s = t < 3 ? AdvObjectiveSpec::classic(d, 0.05 * (t + 1)) : AdvObjectiveSpec::group(d, part, 0.1 * t);
        const auto r = fit(s, o);
        CHECK(r.converged);
        CHECK(r.certificate < 1e-6);
        CHECK(min_norm_subgradient(s, r.beta_hat).norm == doctest::Approx(r.certificate).epsilon(1e-6));
    }
}

TEST_CASE("permutation and scaling")
{
    std::mt19937_64 rng(35);
    const Matrix X = th::gaussian(20, 6, rng);
    const Vector Y = th::gaussian(20, rng);
    std::vector<Index> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix Xp(20, 6);
    for (Index j = 0; j < 6; ++j) Xp.col(j) = X.col(perm[static_cast<std::size_t>(j)]);
    const auto a = fit(AdvObjectiveSpec::classic(make_data(X, Y), 0.2));
    const auto b = fit(AdvObjectiveSpec::classic(make_data(Xp, Y), 0.2));
    CHECK(th::rel(a.objective, b.objective) <= 1e-10);
    for (Index j = 0; j < 6; ++j) CHECK(std::abs(b.beta_hat[j] - a.beta_hat[perm[static_cast<std::size_t>(j)]]) < 1e-6);

    const auto c = fit(AdvObjectiveSpec::classic(make_data(X, 3.0 * Y), 0.2));
    CHECK(th::rel(c.objective, 9.0 * a.objective) <= 1e-9);
}

TEST_CASE("coefficient path")
{
    std::mt19937_64 rng(36);
    const auto d = make_data(th::gaussian(25, 8, rng), th::gaussian(25, rng));
    const auto s = AdvObjectiveSpec::classic(d, 1.0);
    const auto one = coefficient_path(s, {0.3});
    CHECK(th::rel(one[0].objective, fit(s.with_delta(0.3)).objective) <= 1e-9);

    const auto path = coefficient_path(s, log_grid(0.01, 50.0, 8));
    CHECK(path.size() == 8);
    CHECK(path.back().beta_hat.lpNorm<1>() == 0.0);
    CHECK(path.back().objective == doctest::Approx(dual_adv_loss(s, Vector::Zero(8))));
    CHECK(path.front().beta_hat.lpNorm<1>() > 0.0);

    CHECK_THROWS_AS(coefficient_path(s, {0.2, 0.1}), InvalidArgument);
    CHECK_THROWS_AS(coefficient_path(s, {0.0, 0.1}), InvalidArgument);
}

TEST_CASE("log grid")
{
    const auto g = log_grid(0.01, 10.0, 20);
    CHECK(g.size() == 20);
    CHECK(g.front() == 0.01);
    CHECK(g.back() == 10.0);
    for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] / g[k - 1] == doctest::Approx(std::pow(1000.0, 1.0 / 19)));
}

TEST_CASE("options validation")
{
    SolverOptions o;
    o.tol_cert = 0.0;
    CHECK_THROWS_AS(o.validate(), InvalidArgument);
    SolverOptions w;
    w.warm_start = Vector::Zero(3);
    const auto s = AdvObjectiveSpec::classic(make_data(Matrix::Identity(2, 2), Vector::Ones(2)), 0.1);
    CHECK_THROWS_AS(fit(s, w), InvalidArgument);
}

TEST_CASE("iteration budget exhaustion is not an error")
{
    std::mt19937_64 rng(37);
    const auto s = AdvObjectiveSpec::classic(make_data(th::gaussian(40, 30, rng), th::gaussian(40, rng)), 0.1);
    SolverOptions o;
    o.max_iters = 3;
    o.polish = false;
    const auto r = fit(s, o);
    CHECK_FALSE(r.converged);
    CHECK(r.iters <= 3);
}

// Group fit with 40 zero residuals and more active coefficients than rows.
// A residual kink ~1e-14 from the start used to tie f0 and stall the polish
// line search at certificate 1e-3.
TEST_CASE("degenerate group fit reaches the certificate tolerance")
{
    ExperimentConfig cfg;
    cfg.model.n_list = {100};
    cfg.seed = 2024;
    auto draw = draw_replication(cfg, 100, 0);
    auto data = std::make_shared<const Dataset>(std::move(draw.data));
    const GroupPartition groups = cfg.model.groups();
    TunedObjective tuned = choose_delta({DeltaRuleKind::scaled_corollary, 0.1, 0.0}, Variant::group, 100,
                                        cfg.model.p, groups);
    const auto r = fit(make_spec(data, Variant::group, tuned));
    CHECK(r.converged);
    CHECK(r.certificate < 1e-6);
}
