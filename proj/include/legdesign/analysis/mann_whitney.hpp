#pragma once

#include <span>
#include <vector>

namespace legdesign::analysis {

    struct MannWhitneyResult {
        double u_a = 0.0; // wins of sample a over b, ties count one half
        double u_b = 0.0;
        double u = 0.0;   // min(u_a, u_b)
        double p_two_sided = 1.0;
        bool exact = false;
    };

    /// Largest per-side sample size handled by exact enumeration.
    constexpr int kMannWhitneyExactLimit = 8;

    MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

    /// Exact two-sided p-value by enumerating every split of the pooled midranks.
    double mann_whitney_exact_p(std::span<const double> a, std::span<const double> b);

    /// Normal approximation with tie and continuity correction.
    double mann_whitney_normal_p(std::span<const double> a, std::span<const double> b);

} // namespace legdesign::analysis
