#ifndef CVQKD_LINALG_HPP
#define CVQKD_LINALG_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace cvqkd::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

inline double asymmetry(const Matrix& a) {
    return (a - a.transpose()).cwiseAbs().maxCoeff();
}

inline void require_symmetric(const Matrix& a, double tol, const char* what) {
    if (a.rows() != a.cols())
        throw std::invalid_argument(std::string(what) + ": matrix is not square");
    if (asymmetry(a) > tol)
        throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
}

/// Eigenvalues of a real symmetric matrix, ascending.
inline Vector sym_eigenvalues(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("symmetric eigensolver failed to converge");
    return es.eigenvalues();
}

inline double sym_eig_max(const Matrix& a) {
    const Vector ev = sym_eigenvalues(a);
    return ev(ev.size() - 1);
}

inline double sym_eig_min(const Matrix& a) { return sym_eigenvalues(a)(0); }

}  // namespace cvqkd::linalg

#endif  // CVQKD_LINALG_HPP
