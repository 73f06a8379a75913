#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <legdesign/analysis/mann_whitney.hpp>

namespace legdesign::analysis {

    namespace {

        struct Ranked {
            std::vector<double> ranks; // midranks, a's first then b's
            double tie_term = 0.0;     // sum over tie groups of t^3 - t
            bool ties = false;
        };

        Ranked midranks(std::span<const double> a, std::span<const double> b)
        {
            std::vector<double> pooled(a.begin(), a.end());
            pooled.insert(pooled.end(), b.begin(), b.end());
            std::vector<std::size_t> idx(pooled.size());
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });

            Ranked r;
            r.ranks.resize(pooled.size());
            for (std::size_t i = 0; i < idx.size();) {
                std::size_t j = i;
                while (j + 1 < idx.size() && pooled[idx[j + 1]] == pooled[idx[i]])
                    j++;
                const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
                for (std::size_t k = i; k <= j; k++)
                    r.ranks[idx[k]] = rank;
                const double t = static_cast<double>(j - i + 1);
                if (t > 1.0) {
                    r.ties = true;
                    r.tie_term += t * t * t - t;
                }
                i = j + 1;
            }
            return r;
        }

        void check(std::span<const double> a, std::span<const double> b)
        {
            if (a.empty() || b.empty())
                throw std::invalid_argument("mann_whitney_u: empty sample");
            for (double x : a)
                if (std::isnan(x))
                    throw std::invalid_argument("mann_whitney_u: NaN in sample");
            for (double x : b)
                if (std::isnan(x))
                    throw std::invalid_argument("mann_whitney_u: NaN in sample");
        }

        double u_of_a(const Ranked& r, std::size_t na)
        {
            const double rank_sum = std::accumulate(r.ranks.begin(), r.ranks.begin() + static_cast<long>(na), 0.0);
            const double n = static_cast<double>(na);
            return rank_sum - n * (n + 1.0) / 2.0;
        }

        // Counts of each integer U in [0, m n] under H0 without ties:
        // f(m, n) = f(m - 1, n) shifted by n  +  f(m, n - 1).
        std::vector<double> u_distribution(int m, int n)
        {
            std::vector<std::vector<std::vector<double>>> f(
                static_cast<std::size_t>(m + 1), std::vector<std::vector<double>>(static_cast<std::size_t>(n + 1)));
            for (int i = 0; i <= m; i++) {
                for (int j = 0; j <= n; j++) {
                    auto& cur = f[i][j];
                    cur.assign(static_cast<std::size_t>(i * j + 1), 0.0);
                    if (i == 0 || j == 0) {
                        cur[0] = 1.0;
                        continue;
                    }
                    const auto& drop_a = f[i - 1][j];
                    for (std::size_t u = 0; u < drop_a.size(); u++)
                        cur[u + static_cast<std::size_t>(j)] += drop_a[u];
                    const auto& drop_b = f[i][j - 1];
                    for (std::size_t u = 0; u < drop_b.size(); u++)
                        cur[u] += drop_b[u];
                }
            }
            return f[m][n];
        }

    } // namespace

    double mann_whitney_exact_p(std::span<const double> a, std::span<const double> b)
    {
        check(a, b);
        const Ranked r = midranks(a, b);
        const std::size_t na = a.size(), n = r.ranks.size();
        const double mean = 0.5 * static_cast<double>(na * b.size());
        const double dev = std::abs(u_of_a(r, na) - mean) - 1e-9;

        if (!r.ties) {
            const std::vector<double> f = u_distribution(static_cast<int>(na), static_cast<int>(b.size()));
            const double total = std::accumulate(f.begin(), f.end(), 0.0);
            double extreme = 0.0;
            for (std::size_t u = 0; u < f.size(); u++)
                if (std::abs(static_cast<double>(u) - mean) >= dev)
                    extreme += f[u];
            return std::min(1.0, extreme / total);
        }

        // With ties the null distribution depends on the tie pattern, so walk
        // every choice of na positions out of n.
        const double base = static_cast<double>(na) * static_cast<double>(na + 1) / 2.0;
        std::vector<int> pick(na);
        std::iota(pick.begin(), pick.end(), 0);
        double extreme = 0.0, total = 0.0;
        while (true) {
            double rank_sum = 0.0;
            for (int i : pick)
                rank_sum += r.ranks[static_cast<std::size_t>(i)];
            total += 1.0;
            if (std::abs(rank_sum - base - mean) >= dev)
                extreme += 1.0;
            long k = static_cast<long>(na) - 1;
            while (k >= 0 && pick[static_cast<std::size_t>(k)] == static_cast<int>(n - na) + static_cast<int>(k))
                k--;
            if (k < 0)
                break;
            pick[static_cast<std::size_t>(k)]++;
            for (std::size_t i = static_cast<std::size_t>(k) + 1; i < na; i++)
                pick[i] = pick[i - 1] + 1;
        }
        return std::min(1.0, extreme / total);
    }

    double mann_whitney_normal_p(std::span<const double> a, std::span<const double> b)
    {
        check(a, b);
        const Ranked r = midranks(a, b);
        const double m = static_cast<double>(a.size()), n = static_cast<double>(b.size()), big_n = m + n;
        const double mean = m * n / 2.0;
        const double var = m * n / 12.0 * ((big_n + 1.0) - r.tie_term / (big_n * (big_n - 1.0)));
        if (!(var > 0.0))
            return 1.0;
        const double z = std::max(0.0, std::abs(u_of_a(r, a.size()) - mean) - 0.5) / std::sqrt(var);
        return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    }

    MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b)
    {
        check(a, b);
        MannWhitneyResult res;
        res.u_a = u_of_a(midranks(a, b), a.size());
        res.u_b = static_cast<double>(a.size() * b.size()) - res.u_a;
        res.u = std::min(res.u_a, res.u_b);
        res.exact = a.size() <= kMannWhitneyExactLimit && b.size() <= kMannWhitneyExactLimit;
        res.p_two_sided = res.exact ? mann_whitney_exact_p(a, b) : mann_whitney_normal_p(a, b);
        return res;
    }

} // namespace legdesign::analysis
