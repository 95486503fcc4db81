// Serial reference kernels against the OpenMP versions on experiment-sized
// designs. Prints median wall time per call and checks bitwise agreement.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "advreg/kernels.hpp"

using namespace advreg;
namespace k = advreg::kernels;

namespace {

double median_us(const std::function<void()>& f, int reps)
{
    std::vector<double> t;
    for (int r = 0; r < reps; ++r) {
        const auto a = std::chrono::steady_clock::now();
        f();
        const auto b = std::chrono::steady_clock::now();
        t.push_back(std::chrono::duration<double, std::micro>(b - a).count());
    }
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
}

}  // namespace

int main()
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> N;
    std::printf("threads %d\n", k::max_threads());
    std::printf("%-14s %6s %6s %12s %12s %8s %s\n", "kernel", "n", "p", "serial_us", "parallel_us",
                "speedup", "identical");
    bool all_same = true;
    for (auto [n, p] : {std::pair<Index, Index>{50, 500}, {400, 500}, {2000, 500}, {4000, 2000}}) {
        Matrix X(n, p);
        for (Index i = 0; i < X.size(); ++i) X.data()[i] = N(rng);
        Vector beta(p), Y(n), rv(n);
        for (Index j = 0; j < p; ++j) beta[j] = N(rng);
        for (Index i = 0; i < n; ++i) Y[i] = N(rng);
        for (Index i = 0; i < n; ++i) rv[i] = N(rng);
        const int reps = n * p > 1000000 ? 15 : 101;
        Vector a, b;

        auto row = [&](const char* name, auto serial, auto parallel, auto same) {
            const double ts = median_us(serial, reps);
            const double tp = median_us(parallel, reps);
            const bool ok = same();
            all_same = all_same && ok;
            std::printf("%-14s %6lld %6lld %12.1f %12.1f %8.2f %s\n", name, static_cast<long long>(n),
                        static_cast<long long>(p), ts, tp, ts / tp, ok ? "yes" : "NO");
        };
        row("gemv", [&] { k::serial::gemv(X, beta, a); }, [&] { k::parallel::gemv(X, beta, b); },
            [&] { return a == b; });
        row("gemv_t", [&] { k::serial::gemv_t(X, rv, a); }, [&] { k::parallel::gemv_t(X, rv, b); },
            [&] { return a == b; });
        row("residuals", [&] { k::serial::residuals(X, beta, Y, a); },
            [&] { k::parallel::residuals(X, beta, Y, b); }, [&] { return a == b; });
        double sa = 0.0, sb = 0.0;
        row("adv_square_sum", [&] { sa = k::serial::adv_square_sum(rv, 0.3); },
            [&] { sb = k::parallel::adv_square_sum(rv, 0.3); }, [&] { return sa == sb; });
    }
    return all_same ? 0 : 1;
}
