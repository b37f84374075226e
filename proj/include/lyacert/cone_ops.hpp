// SPDX-License-Identifier: Apache-2.0
//
// Scaled-triangle vectorization of symmetric matrices and cone projections.
// A k x k symmetric matrix X is stored as k(k+1)/2 entries: the lower
// triangle in column-major order with off-diagonal entries scaled by sqrt(2),
// so that <svec(X), svec(Y)> = tr(X Y).

#ifndef LYACERT_CONE_OPS_HPP
#define LYACERT_CONE_OPS_HPP

#include <cmath>
#include <cstddef>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace lyacert::conic {

inline constexpr std::size_t triangle_size(std::size_t k) { return k * (k + 1) / 2; }

/// Position of entry (i, j), i >= j, inside svec of a k x k matrix.
inline constexpr std::size_t svec_index(std::size_t k, std::size_t i, std::size_t j) {
    // columns 0..j-1 hold k + (k-1) + ... + (k-j+1) entries
    return j * k - j * (j - 1) / 2 + (i - j);
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> svec(const Eigen::MatrixBase<Derived>& X) {
    using S = typename Derived::Scalar;
    const auto k = X.rows();
    Eigen::Matrix<S, Eigen::Dynamic, 1> v(k * (k + 1) / 2);
    const S r2 = std::sqrt(S(2));
    Eigen::Index pos = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
        v(pos++) = X(j, j);
        for (Eigen::Index i = j + 1; i < k; ++i) v(pos++) = r2 * S(0.5) * (X(i, j) + X(j, i));
    }
    return v;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> smat(const Eigen::MatrixBase<Derived>& v,
                                                                             Eigen::Index k) {
    using S = typename Derived::Scalar;
    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> X(k, k);
    const S inv_r2 = S(1) / std::sqrt(S(2));
    Eigen::Index pos = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
        X(j, j) = v(pos++);
        for (Eigen::Index i = j + 1; i < k; ++i) {
            X(i, j) = inv_r2 * v(pos++);
            X(j, i) = X(i, j);
        }
    }
    return X;
}

/// Matrix size k from a triangle length; returns -1 if not a triangle number.
inline Eigen::Index triangle_order(Eigen::Index len) {
    const auto k = static_cast<Eigen::Index>(std::llround((std::sqrt(8.0 * double(len) + 1.0) - 1.0) / 2.0));
    return k * (k + 1) / 2 == len ? k : -1;
}

template <typename Scalar>
Scalar min_eigenvalue(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& X) {
    if (X.rows() == 0) return Scalar(0);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> eig(X, Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(0);
}

template <typename Scalar>
Scalar max_eigenvalue(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& X) {
    if (X.rows() == 0) return Scalar(0);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> eig(X, Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(X.rows() - 1);
}

/// Euclidean projection onto the PSD cone (eigenvalue clipping).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> project_psd(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& X) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> eig(X);
    return eig.eigenvectors() * eig.eigenvalues().cwiseMax(Scalar(0)).asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace lyacert::conic

#endif  // LYACERT_CONE_OPS_HPP
