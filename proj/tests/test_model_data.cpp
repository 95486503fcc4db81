#include <doctest.h>

#include "advreg/model_data.hpp"
#include "helpers.hpp"

using namespace advreg;

TEST_CASE("reference coefficient vector")
{
    const Vector b = reference_beta_star();
    REQUIRE(b.size() == 500);
    CHECK(b[0] == 0.1);
    CHECK(b[3] == 0.25);
    CHECK(b[496] == 0.9);
    CHECK(b[499] == 1.05);
    CHECK(support_of(b).size() == 8);
    CHECK(b.squaredNorm() == doctest::Approx(3.95).epsilon(1e-14));
}

TEST_CASE("synthetic draw reconstructs Y and is deterministic")
{
    const Vector b = reference_beta_star();
    const auto a = generate_synthetic(400, 500, b, 0.1, 11);
    CHECK(a.data.Y == a.data.X * b + a.truth.epsilon);
    for (Index j = 0; j < 500; ++j) CHECK(a.data.X.col(j).norm() == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(a.truth.s() == 8);

    const auto x = generate_synthetic(5, 3, Vector::Ones(3), 0.5, 7);
    const auto y = generate_synthetic(5, 3, Vector::Ones(3), 0.5, 7);
    CHECK(x.data.X == y.data.X);
    CHECK(x.data.Y == y.data.Y);
    const auto z = generate_synthetic(5, 3, Vector::Ones(3), 0.5, 8);
    CHECK(x.data.X != z.data.X);
}

TEST_CASE("noiseless draw")
{
    const auto d = generate_synthetic(20, 10, reference_beta_star(10), 0.0, 3);
    CHECK(d.truth.epsilon.cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.data.Y == d.data.X * d.truth.beta_star);
}

TEST_CASE("generation rejects bad input")
{
    CHECK_THROWS_AS(generate_synthetic(0, 3, Vector::Ones(3), 0.1, 1), InvalidArgument);
    CHECK_THROWS_AS(generate_synthetic(5, 3, Vector::Ones(2), 0.1, 1), InvalidArgument);
    CHECK_THROWS_AS(generate_synthetic(5, 3, Vector::Ones(3), -1.0, 1), InvalidArgument);
}

TEST_CASE("column normalization")
{
    Matrix X(2, 1);
    X << 3, 4;
    const auto r = normalize_columns(X);
    CHECK(r.scale[0] == doctest::Approx(std::sqrt(2.0) / 5.0).epsilon(1e-15));
    CHECK(r.X.col(0).norm() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

    Matrix U(4, 1);
    U << 1, -1, 1, -1;
    CHECK(normalize_columns(U).X == U);

    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const Index n = 1 + static_cast<Index>(rng() % 30);
        const Index p = 1 + static_cast<Index>(rng() % 30);
        const Matrix A = th::gaussian(n, p, rng);
        const auto N = normalize_columns(A);
        for (Index j = 0; j < p; ++j) {
            CHECK(std::abs(N.X.col(j).norm() - std::sqrt(double(n))) <= 1e-12 * std::sqrt(double(n)));
        }
    }

    Matrix Z = Matrix::Ones(3, 3);
    Z.col(1).setZero();
    try {
        normalize_columns(Z);
        FAIL("expected RescaleError");
    } catch (const RescaleError& e) {
        CHECK(e.column() == 1);
    }
}

TEST_CASE("support groups")
{
    const auto part = GroupPartition::contiguous(500, 4);
    CHECK(part.num_groups() == 125);
    const auto sg = support_groups(reference_beta_star(), part);
    CHECK(sg.groups == IndexSet{0, 124});
    CHECK(sg.g == 2);
    CHECK(sg.size_GJ == 8);

    CHECK(support_groups(Vector::Zero(500), part).g == 0);
    Vector b = Vector::Zero(500);
    b[9] = 2.0;
    CHECK(support_groups(b, part).groups == IndexSet{2});

    // permuting inside a group does not change J
    Vector c = reference_beta_star();
    std::swap(c[0], c[3]);
    std::swap(c[497], c[498]);
    CHECK(support_groups(c, part).groups == sg.groups);
}

TEST_CASE("partition validation")
{
    CHECK_THROWS_AS(GroupPartition({{0, 1}, {1, 2}}, Vector::Ones(2)), InvalidArgument);
    CHECK_THROWS_AS(GroupPartition({{0, 2}}, Vector::Ones(1)), InvalidArgument);
    CHECK_THROWS_AS(GroupPartition({{0}, {1}}, Vector::Constant(2, -1.0)), InvalidArgument);
    CHECK_THROWS_AS(GroupPartition::contiguous(10, 4), InvalidArgument);
    const GroupPartition g({{2, 0}, {1}}, Vector::Ones(2));
    CHECK(g.dimension() == 3);
    CHECK(g.group_size(0) == 2);
}

TEST_CASE("dataset validation")
{
    Dataset d;
    d.X = Matrix::Ones(3, 2);
    d.Y = Vector::Ones(2);
    CHECK_THROWS_AS(d.validate(), InvalidArgument);
    d.Y = Vector::Ones(3);
    d.X(1, 1) = NAN;
    CHECK_THROWS_AS(d.validate(), InvalidArgument);
}
