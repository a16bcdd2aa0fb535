#pragma once
// Independent reference computations used only by tests.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tml/mat2.hpp"
#include "tml/potential.hpp"

namespace oracle {

using LMat = std::array<long double, 4>;  // row-major 2x2

inline LMat lmul(const LMat& a, const LMat& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3]};
}

// Naive extended-precision product A_n ... A_{m+1} (n >= m) or inverse steps (n < m).
inline LMat naive_transfer(const tml::PotentialSpec& V, double E, std::int64_t n, std::int64_t m) {
    LMat T{1, 0, 0, 1};
    if (n >= m) {
        for (std::int64_t k = m + 1; k <= n; ++k) T = lmul({E - V.eval(k), -1, 1, 0}, T);
    } else {
        for (std::int64_t k = m; k > n; --k) T = lmul({0, 1, -1, E - V.eval(k)}, T);
    }
    return T;
}

inline tml::Mat2 to_mat(const LMat& a) {
    return {static_cast<double>(a[0]), static_cast<double>(a[1]), static_cast<double>(a[2]),
            static_cast<double>(a[3])};
}

// Largest singular value by SVD.
inline double svd_norm(const tml::Mat2& m) {
    Eigen::Matrix2d a;
    a << m.a11, m.a12, m.a21, m.a22;
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(a);
    return svd.singularValues()(0);
}

// Largest singular value by power iteration on the Gram matrix.
inline double power_iteration_norm(const tml::Mat2& m, int iters = 200) {
    tml::Mat2 g = m.transpose() * m;
    double x = 1.0, y = 0.37;
    double lam = 0.0;
    for (int i = 0; i < iters; ++i) {
        double nx = g.a11 * x + g.a12 * y;
        double ny = g.a21 * x + g.a22 * y;
        lam = std::hypot(nx, ny);
        x = nx / lam;
        y = ny / lam;
    }
    return std::sqrt(lam);
}

// Dense eigendecomposition of the Dirichlet truncation on sites first..first+N-1.
struct DenseEig {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

inline DenseEig dense_truncation(const tml::PotentialSpec& V, std::int64_t first, std::int64_t N,
                                 double site1_shift = 0.0) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(N, N);
    for (std::int64_t i = 0; i < N; ++i) {
        H(i, i) = V.eval(first + i);
        if (i + 1 < N) H(i, i + 1) = H(i + 1, i) = 1.0;
    }
    H(0, 0) += site1_shift;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace oracle
