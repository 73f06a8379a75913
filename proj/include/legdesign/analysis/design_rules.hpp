#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <legdesign/analysis/eigen.hpp>

namespace legdesign::analysis {

    class DegenerateColumnError : public std::invalid_argument {
    public:
        DegenerateColumnError(int column)
            : std::invalid_argument("column " + std::to_string(column + 1) + " has zero scale"), column(column)
        {
        }
        int column;
    };

    /// Per-column RMS of the raw values, s_j = sqrt(sum_i g_ij^2 / n).
    template <typename Derived>
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> scales(const Eigen::MatrixBase<Derived>& samples)
    {
        using Scalar = typename Derived::Scalar;
        if (samples.rows() < 2)
            throw std::invalid_argument("scales: need at least 2 samples");
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> s = (samples.cwiseAbs2().colwise().sum() / Scalar(samples.rows())).cwiseSqrt().transpose();
        for (Eigen::Index j = 0; j < s.size(); j++)
            if (!(s(j) > Scalar(0)))
                throw DegenerateColumnError(static_cast<int>(j));
        return s;
    }

    /// M = (1/n) sum_i z_i z_i^T with z_ij = (g_ij - mean_j) / s_j.
    template <typename Derived>
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> normalized_covariance(
        const Eigen::MatrixBase<Derived>& samples)
    {
        using Scalar = typename Derived::Scalar;
        const auto s = scales(samples);
        const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> mean = samples.colwise().mean();
        const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> z
            = (samples.rowwise() - mean).array().rowwise() / s.transpose().array();
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m = z.transpose() * z / Scalar(samples.rows());
        return Scalar(0.5) * (m + m.transpose());
    }

    struct RuleTerm {
        int feature = 0;
        double coefficient = 0.0;
        double mean = 0.0;
        double weight = 0.0; // |coefficient * s_feature|
    };

    /// target = intercept + sum_k coefficient_k (g_k - mean_k)
    struct DesignRule {
        int target = 0;
        double intercept = 0.0;
        std::vector<RuleTerm> terms; // decreasing weight, ties by feature index
        double eigenvalue = 0.0;
        double sqrt_eigenvalue = 0.0;
        double mean_error_percent = 0.0;

        double predict(const Eigen::Ref<const Eigen::VectorXd>& g) const;
    };

    /// One rule per eigenpair of the normalized covariance with sqrt(e) <= threshold,
    /// ascending by eigenvalue.
    std::vector<DesignRule> extract_rules(const Eigen::MatrixXd& samples, double threshold = 0.2);

    /// Mean absolute residual of `rule` on `samples`, as a percentage of the target's scale.
    double rule_error_percent(const DesignRule& rule, const Eigen::MatrixXd& samples);

    /// Table-style report, one line per rule. `symbols` name the variables in
    /// the equations and default to `names`.
    std::string format_rules(const std::vector<DesignRule>& rules, const std::vector<std::string>& names,
        const std::vector<std::string>& symbols = {});

} // namespace legdesign::analysis
