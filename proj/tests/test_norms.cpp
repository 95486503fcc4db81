#include <doctest.h>

#include "advreg/norms.hpp"
#include "helpers.hpp"

using namespace advreg;

namespace {

WeightedGroupNorm make(const GroupPartition& p, Exponent r, Exponent s)
{
    WeightedGroupNorm n;
    n.partition = p;
    n.inner = r;
    n.outer = s;
    return n;
}

}  // namespace

TEST_CASE("lq norms")
{
    Vector z(2);
    z << 3, -4;
    CHECK(lq_norm(z, 2.0) == 5.0);
    CHECK(lq_norm(z, Exponent::infinity()) == 4.0);
    Vector w(3);
    w << 1, -2, 3;
    CHECK(lq_norm(w, 1.0) == 6.0);
    CHECK(lq_norm(w, INFINITY) == 3.0);
    CHECK_THROWS_AS(lq_norm(w, 0.5), InvalidArgument);
    CHECK_THROWS_AS(Exponent::finite(0.9), InvalidArgument);
}

TEST_CASE("weighted group norm by hand")
{
    Vector z(4);
    z << 3, 4, 5, 12;
    Vector w(2);
    w << 2, 0.5;
    const GroupPartition p({{0, 1}, {2, 3}}, w);
    CHECK(weighted_group_norm(z, make(p, Exponent::finite(2), Exponent::infinity())) == doctest::Approx(10.0));
    const GroupPartition u({{0, 1}, {2, 3}}, Vector::Ones(2));
    CHECK(weighted_group_norm(z, make(u, Exponent::finite(2), Exponent::finite(1))) == doctest::Approx(18.0));
    CHECK(weighted_group_norm(Vector::Zero(4), make(p, Exponent::finite(3), Exponent::finite(1.5))) == 0.0);
    CHECK_THROWS_AS(weighted_group_norm(Vector::Zero(3), make(p, Exponent::finite(2), Exponent::finite(2))),
                    InvalidArgument);
}

TEST_CASE("dual parameters")
{
    Vector w(2);
    w << 2, 0.5;
    const GroupPartition p({{0, 1}, {2, 3}}, w);
    auto n = make(p, Exponent::finite(2), Exponent::infinity());
    const auto d = dual_norm_params(n);
    CHECK(d.inner == Exponent::finite(2));
    CHECK(d.outer == Exponent::finite(1));
    CHECK(d.effective_weight(0) == doctest::Approx(0.5));
    const auto dd = dual_norm_params(d);
    CHECK(dd.inner == n.inner);
    CHECK(dd.outer == n.outer);
    CHECK(dd.effective_weight(1) == doctest::Approx(0.5));

    const auto l1 = make(GroupPartition::singletons(3), Exponent::finite(1), Exponent::finite(1));
    const auto linf = dual_norm_params(l1);
    CHECK(linf.inner.is_infinite());
    CHECK(linf.outer.is_infinite());
}

TEST_CASE("singleton reductions")
{
    std::mt19937_64 rng(1);
    const Vector z = th::gaussian(7, rng);
    const auto s = GroupPartition::singletons(7);
    CHECK(weighted_group_norm(z, make(s, Exponent::finite(2), Exponent::finite(1))) ==
          doctest::Approx(z.lpNorm<1>()).epsilon(1e-14));
    CHECK(weighted_group_norm(z, make(s, Exponent::finite(2), Exponent::infinity())) ==
          doctest::Approx(z.lpNorm<Eigen::Infinity>()).epsilon(1e-14));
}

TEST_CASE("matches a scalar fold on random inputs")
{
    std::mt19937_64 rng(2);
    const double ex[] = {1.0, 1.5, 2.0, 3.0, INFINITY};
    for (int t = 0; t < 200; ++t) {
        const Vector z = th::gaussian(6, rng);
        Vector w(3);
        for (int l = 0; l < 3; ++l) w[l] = 0.2 + (rng() % 1000) / 250.0;
        const GroupPartition p({{0, 3}, {1, 2, 5}, {4}}, w);
        const double r = ex[rng() % 5];
        const double s = ex[rng() % 5];
        auto E = [](double q) { return std::isinf(q) ? Exponent::infinity() : Exponent::finite(q); };
        const double got = weighted_group_norm(z, make(p, E(r), E(s)));
        CHECK(got == doctest::Approx(oracle::rs_norm(z, th::to_oracle(p), w, r, s)).epsilon(1e-12));
        auto inv = make(p, E(r), E(s));
        inv.mode = WeightMode::inverse;
        CHECK(weighted_group_norm(z, inv) ==
              doctest::Approx(oracle::rs_norm(z, th::to_oracle(p), w.cwiseInverse(), r, s)).epsilon(1e-12));
    }
}

TEST_CASE("dual norm by search")
{
    const GroupPartition p({{0, 1}, {2, 3}}, Vector::Ones(2));
    const auto n = make(p, Exponent::finite(2), Exponent::infinity());
    Vector e1 = Vector::Zero(4);
    e1[0] = 1.0;
    CHECK(dual_norm_by_search(e1, n, 100, 3) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dual_norm_by_search(Vector::Zero(4), n, 100, 3) == 0.0);

    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
        const Vector z = th::gaussian(4, rng);
        Vector w(2);
        w << 0.5 + (rng() % 100) / 50.0, 0.5 + (rng() % 100) / 50.0;
        const auto m = make(p.with_weights(w), Exponent::finite(2), Exponent::infinity());
        const double closed = weighted_group_norm(z, dual_norm_params(m));
        const double blind = dual_norm_by_search(z, m, 500, t, false);
        const double with = dual_norm_by_search(z, m, 500, t, true);
        CHECK(blind <= closed * (1 + 1e-12));
        CHECK(std::abs(with - closed) < 1e-6);
    }
    CHECK_THROWS_AS(dual_norm_by_search(e1, n, 0, 1), InvalidArgument);
}
