#pragma once

#include <Eigen/Dense>
#include <complex>

namespace turwave {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Eigenvalues of a dense nonsymmetric matrix (LAPACK geev), sorted by
/// descending real part, ties broken by ascending imaginary part.
CVector eigenvalues(const CMatrix& A);
CVector eigenvalues(const Matrix& A);

struct EigenPairs {
  CVector values;   // same ordering as eigenvalues()
  CMatrix vectors;  // right eigenvectors, column j pairs with values[j]
};

EigenPairs eigenpairs(const Matrix& A);

/// max Re over the spectrum of A
double spectral_abscissa(const CMatrix& A);

/// Sorts a set of eigenvalues with the library-wide ordering.
void sort_spectrum(CVector& v);

}  // namespace turwave
