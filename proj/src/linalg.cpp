#include "turwave/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace turwave {

void sort_spectrum(CVector& v) {
  std::sort(v.data(), v.data() + v.size(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() < b.imag();
  });
}

CVector eigenvalues(const CMatrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("eigenvalues: matrix not square");
  const lapack_int n = static_cast<lapack_int>(A.rows());
  if (n == 0) return CVector();
  CMatrix work = A;  // zgeev overwrites its input
  CVector w(n);
  lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', 'N', n,
      reinterpret_cast<lapack_complex_double*>(work.data()), n,
      reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1, nullptr, 1);
  if (info != 0) throw std::runtime_error("zgeev failed, info=" + std::to_string(info));
  sort_spectrum(w);
  return w;
}

CVector eigenvalues(const Matrix& A) {
  return eigenvalues(CMatrix(A.cast<Complex>()));
}

EigenPairs eigenpairs(const Matrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("eigenpairs: matrix not square");
  const lapack_int n = static_cast<lapack_int>(A.rows());
  CMatrix work = A.cast<Complex>();
  CVector w(n);
  CMatrix vr(n, n);
  lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', 'V', n,
      reinterpret_cast<lapack_complex_double*>(work.data()), n,
      reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1,
      reinterpret_cast<lapack_complex_double*>(vr.data()), n);
  if (info != 0) throw std::runtime_error("zgeev failed, info=" + std::to_string(info));
  // sort pairs with the library ordering
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (w[a].real() != w[b].real()) return w[a].real() > w[b].real();
    return w[a].imag() < w[b].imag();
  });
  EigenPairs out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int j = 0; j < n; ++j) {
    out.values[j] = w[idx[j]];
    out.vectors.col(j) = vr.col(idx[j]);
  }
  return out;
}

double spectral_abscissa(const CMatrix& A) {
  CVector w = eigenvalues(A);
  return w.size() ? w[0].real() : 0.0;  // already sorted by Re desc
}

}  // namespace turwave
