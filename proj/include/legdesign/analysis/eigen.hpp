#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace legdesign::analysis {

    template <typename Scalar>
    struct SymEigen {
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;             // ascending
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors; // columns, orthonormal
        int sweeps = 0;
    };

    /// Cyclic Jacobi eigendecomposition of a symmetric matrix.
    ///
    /// Sweeps rotate every off-diagonal pair to zero until the off-diagonal
    /// Frobenius norm falls below `tol` times the matrix norm. Each eigenvector
    /// is signed so its largest-magnitude component is positive (first index
    /// on ties).
    template <typename Derived>
    SymEigen<typename Derived::Scalar> jacobi_eigen(const Eigen::MatrixBase<Derived>& m,
        typename Derived::Scalar tol = typename Derived::Scalar(1e-12), int max_sweeps = 100)
    {
        using Scalar = typename Derived::Scalar;
        using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
        using std::abs;
        using std::sqrt;

        if (m.rows() != m.cols())
            throw std::invalid_argument("jacobi_eigen: matrix is not square");
        const Eigen::Index n = m.rows();
        Mat a = m;
        const Scalar norm = a.norm();
        const Scalar sym_tol = Scalar(1e-10) * std::max(Scalar(1), a.cwiseAbs().maxCoeff());
        if (n > 0 && (a - a.transpose()).cwiseAbs().maxCoeff() > sym_tol)
            throw std::invalid_argument("jacobi_eigen: matrix is not symmetric");
        a = Scalar(0.5) * (a + a.transpose()).eval();

        Mat v = Mat::Identity(n, n);
        auto off_norm = [&] {
            Scalar s(0);
            for (Eigen::Index p = 0; p < n; p++)
                for (Eigen::Index q = p + 1; q < n; q++)
                    s += Scalar(2) * a(p, q) * a(p, q);
            return sqrt(s);
        };

        SymEigen<Scalar> out;
        for (; out.sweeps < max_sweeps && off_norm() > tol * std::max(Scalar(1), norm); out.sweeps++) {
            for (Eigen::Index p = 0; p < n; p++) {
                for (Eigen::Index q = p + 1; q < n; q++) {
                    const Scalar apq = a(p, q);
                    if (apq == Scalar(0))
                        continue;
                    const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
                    const Scalar t = (theta >= Scalar(0) ? Scalar(1) : Scalar(-1)) / (abs(theta) + sqrt(theta * theta + Scalar(1)));
                    const Scalar c = Scalar(1) / sqrt(t * t + Scalar(1));
                    const Scalar s = t * c;
                    for (Eigen::Index k = 0; k < n; k++) {
                        const Scalar akp = a(k, p), akq = a(k, q);
                        a(k, p) = c * akp - s * akq;
                        a(k, q) = s * akp + c * akq;
                    }
                    for (Eigen::Index k = 0; k < n; k++) {
                        const Scalar apk = a(p, k), aqk = a(q, k);
                        a(p, k) = c * apk - s * aqk;
                        a(q, k) = s * apk + c * aqk;
                    }
                    for (Eigen::Index k = 0; k < n; k++) {
                        const Scalar vkp = v(k, p), vkq = v(k, q);
                        v(k, p) = c * vkp - s * vkq;
                        v(k, q) = s * vkp + c * vkq;
                    }
                }
            }
        }

        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index(0));
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

        out.values.resize(n);
        out.vectors.resize(n, n);
        for (Eigen::Index i = 0; i < n; i++) {
            const Eigen::Index src = order[static_cast<std::size_t>(i)];
            out.values(i) = a(src, src);
            auto col = v.col(src);
            Eigen::Index big = 0;
            for (Eigen::Index k = 1; k < n; k++)
                if (abs(col(k)) > abs(col(big)))
                    big = k;
            out.vectors.col(i) = col(big) < Scalar(0) ? Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(-col) : Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(col);
        }
        return out;
    }

} // namespace legdesign::analysis
