#include <doctest.h>

#include "advreg/analysis.hpp"
#include "advreg/tuning.hpp"
#include "helpers.hpp"

using namespace advreg;

TEST_CASE("prediction error")
{
    std::mt19937_64 rng(51);
    Dataset d;
    d.X = Matrix::Identity(2, 2);
    d.Y = Vector::Zero(2);
    const auto e = prediction_error(d, Vector::Ones(2), Vector::Zero(2));
    CHECK(e.half_mean == 0.5);
    CHECK(e.mean == 1.0);
    d.X = th::gaussian(10, 4, rng);
    const Vector b = th::gaussian(4, rng);
    const Vector c = th::gaussian(4, rng);
    CHECK(prediction_error(d, b, b).mean == 0.0);
    const auto e1 = prediction_error(d, b, c);
    const auto e2 = prediction_error(d, c + 2 * (b - c), c);
    CHECK(e2.mean == doctest::Approx(4 * e1.mean));
    CHECK(e1.half_mean == e1.mean / 2);
}

TEST_CASE("restricted eigenvalue on orthonormal designs")
{
    std::mt19937_64 rng(52);
    const Matrix X = oracle::orthonormal_design(40, 10, rng);
    CHECK(is_orthonormal_design(X));
    for (Index s : {1, 3, 10}) {
        for (double c : {0.5, 1.0, 3.0}) {
            const auto e = re_constant(X, s, c);
            CHECK(e.value == 1.0);
            CHECK(e.mode == ReMode::exact_orthonormal);
        }
    }
    const auto part = GroupPartition::contiguous(10, 2);
    CHECK(blocks_orthonormal(X, part));
    const auto g = gre_constant(X, part, 2, 3.0);
    CHECK(g.value == 1.0);
    CHECK(g.mode == ReMode::exact_orthonormal);
}

TEST_CASE("duplicated column drives the estimate to zero")
{
    std::mt19937_64 rng(53);
    Matrix X = th::gaussian(30, 8, rng);
    X.col(5) = X.col(2);
    const auto e = re_constant(X, 1, 1.0);
    CHECK(e.mode == ReMode::sampled_upper_estimate);
    CHECK(e.supports_enumerated);
    CHECK(e.value < 1e-8);
}

TEST_CASE("estimates are homogeneous and above the singular value floor")
{
    std::mt19937_64 rng(54);
    const Matrix X = th::gaussian(40, 10, rng);
    ReOptions o;
    o.seed = 9;
    const auto a = re_constant(X, 2, 3.0, o);
    const auto b = re_constant(2.5 * X, 2, 3.0, o);
    CHECK(b.value == doctest::Approx(2.5 * a.value).epsilon(1e-6));

    Eigen::JacobiSVD<Matrix> svd(X);
    const double floor = svd.singularValues().minCoeff() / std::sqrt(40.0);
    CHECK(a.value >= floor * (1 - 1e-9));

    const auto all = gre_constant(X, GroupPartition::contiguous(10, 2), 5, 3.0, o);
    CHECK(all.value >= floor * (1 - 1e-9));
    const auto single = gre_constant(X, GroupPartition::singletons(10), 2, 3.0, o);
    CHECK(single.value >= floor * (1 - 1e-9));
    // same cone as RE but a smaller denominator
    CHECK(single.value >= a.value * (1 - 1e-3));
}

TEST_CASE("estimate is deterministic for a seed")
{
    std::mt19937_64 rng(55);
    const Matrix X = th::gaussian(30, 20, rng);
    ReOptions o;
    o.seed = 4;
    o.max_supports = 16;
    const auto a = re_constant(X, 3, 3.0, o);
    const auto b = re_constant(X, 3, 3.0, o);
    CHECK(a.value == b.value);
    CHECK_FALSE(a.supports_enumerated);
    CHECK(a.supports == 16);
}

TEST_CASE("classic bounds")
{
    ClassicBoundInputs in;
    in.s = 8;
    in.p = 500;
    in.n = 400;
    in.beta_star_l2 = std::sqrt(3.95);
    in.gamma = 1.0;
    in.sigma = 0.1;
    const auto r = bound_classic(in, BoundForm::corollary_simplified);
    CHECK(r.rate == doctest::Approx(23.8641).epsilon(1e-5));
    CHECK(r.R == doctest::Approx(2 * std::sqrt(41 * 3.95)));
    CHECK(r.bound == doctest::Approx(15460.3).epsilon(1e-4));
    CHECK(r.sigma_condition.value());

    in.delta = 0.0;
    CHECK(bound_classic(in, BoundForm::theorem).bound == 0.0);

    in.delta = 0.3;
    in.eps_l1 = 40.0;
    const double base = bound_classic(in, BoundForm::theorem).bound;
    auto more = in;
    more.s = 9;
    CHECK(bound_classic(more, BoundForm::theorem).bound > base);
    more = in;
    more.delta = 0.6;
    CHECK(bound_classic(more, BoundForm::theorem).bound == doctest::Approx(4 * base));
    more = in;
    more.gamma = 0.01;
    CHECK(bound_classic(more, BoundForm::theorem).bound > base);

    more.gamma = 0.0;
    const auto u = bound_classic(more, BoundForm::theorem);
    CHECK_FALSE(u.defined);
    CHECK(std::isnan(u.bound));
    CHECK(to_json(u)["bound"].is_null());
}

TEST_CASE("corollary dominates the theorem at the rule delta")
{
    ClassicBoundInputs in;
    in.s = 8;
    in.p = 500;
    in.n = 400;
    in.delta = delta_classic(400, 500);
    in.gamma = 0.8;
    in.eps_l1 = 31.0;
    in.beta_star_l2 = 2.0;
    CHECK(bound_classic(in, BoundForm::corollary_highprob).bound >= bound_classic(in, BoundForm::theorem).bound);
}

TEST_CASE("group bounds")
{
    GroupBoundInputs in;
    in.g = 2;
    in.size_GJ = 8;
    in.L = 125;
    in.n = 400;
    in.omega_J = Vector::Ones(2);
    in.kappa = 1.0;
    in.beta_star_l2 = std::sqrt(3.95);
    in.blocks_orthonormal = true;
    const auto r = bound_group(in, BoundForm::corollary_simplified);
    CHECK(r.rate == doctest::Approx(19.0693).epsilon(1e-5));
    CHECK(r.applicable);
    ClassicBoundInputs c;
    c.s = 8;
    c.p = 500;
    c.n = 400;
    CHECK(r.rate < bound_classic(c, BoundForm::corollary_simplified).rate);

    in.blocks_orthonormal = false;
    CHECK_FALSE(bound_group(in, BoundForm::corollary_highprob).applicable);

    GroupBoundInputs s;
    s.g = 5;
    s.size_GJ = 5;
    s.L = 300;
    s.n = 100;
    s.omega_J = Vector::Ones(5);
    s.kappa = 1.0;
    CHECK(bound_group(s, BoundForm::corollary_highprob).rate ==
          doctest::Approx(432.0 * 5 * (1 + std::log(300.0)) / 100));
    s.omega_J = Vector::Ones(4);
    CHECK_THROWS_AS(bound_group(s, BoundForm::theorem), InvalidArgument);
}

TEST_CASE("bound form names")
{
    for (auto f : {BoundForm::theorem, BoundForm::corollary_highprob, BoundForm::corollary_simplified}) {
        CHECK(parse_bound_form(to_string(f)) == f);
    }
    CHECK_THROWS(parse_bound_form("lemma"));
}

TEST_CASE("shrinkage check")
{
    const auto z = shrinkage_check(Vector::Zero(4), Vector::Zero(4), Variant::classic);
    CHECK(z.degenerate);
    CHECK(std::isnan(z.ratio));
    CHECK(z.holds);

    std::mt19937_64 rng(56);
    const Vector b = th::gaussian(6, rng);
    const Vector t = th::gaussian(6, rng);
    const auto c = shrinkage_check(b, t, Variant::classic);
    CHECK(c.ratio == doctest::Approx(b.lpNorm<1>() / t.lpNorm<1>()));
    const auto g = shrinkage_check(b, t, Variant::group, GroupPartition::singletons(6));
    CHECK(g.ratio == doctest::Approx(c.ratio).epsilon(1e-14));
    CHECK_FALSE(shrinkage_check(10 * t, t, Variant::classic).holds);
}
