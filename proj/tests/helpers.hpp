#pragma once

#include <memory>
#include <random>

#include "advreg/model_data.hpp"
#include "advreg/objective.hpp"
#include "oracles.hpp"

namespace th {

using namespace advreg;

inline std::shared_ptr<const Dataset> make_data(Matrix X, Vector Y)
{
    auto d = std::make_shared<Dataset>();
    d->X = std::move(X);
    d->Y = std::move(Y);
    return d;
}

template <class Rng>
Matrix gaussian(Index n, Index p, Rng& rng)
{
    std::normal_distribution<double> N;
    Matrix X(n, p);
    for (Index k = 0; k < X.size(); ++k) X.data()[k] = N(rng);
    return X;
}

template <class Rng>
Vector gaussian(Index n, Rng& rng)
{
    std::normal_distribution<double> N;
    Vector v(n);
    for (Index k = 0; k < n; ++k) v[k] = N(rng);
    return v;
}

inline oracle::Groups to_oracle(const GroupPartition& g)
{
    oracle::Groups out;
    for (const auto& grp : g.groups()) {
        std::vector<int> v;
        for (Index j : grp) v.push_back(static_cast<int>(j));
        out.push_back(v);
    }
    return out;
}

inline double rel(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

}  // namespace th
