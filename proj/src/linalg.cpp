#include "qextrap/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace qextrap {

double hermiticity_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const CMatrix& m, double tol) { return hermiticity_defect(m) <= tol; }

double min_eigenvalue(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double min_eigenvalue(const RMatrix& m) {
  if (m.size() == 0) return 0.0;
  RMatrix h = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

namespace {
template <class F>
CMatrix spectral_map(const CMatrix& m, F f) {
  if (m.size() == 0) return m;
  CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  RVector w = es.eigenvalues().unaryExpr(f);
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}
}  // namespace

CMatrix hermitian_sqrt(const CMatrix& m) {
  return spectral_map(m, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

CMatrix hermitian_pinv(const CMatrix& m, double cutoff) {
  return spectral_map(m, [cutoff](double x) { return x > cutoff ? 1.0 / x : 0.0; });
}

CMatrix hermitian_pinv_sqrt(const CMatrix& m, double cutoff) {
  return spectral_map(m, [cutoff](double x) { return x > cutoff ? 1.0 / std::sqrt(x) : 0.0; });
}

CMatrix range_projector(const CMatrix& m, double cutoff) {
  return spectral_map(m, [cutoff](double x) { return x > cutoff ? 1.0 : 0.0; });
}

CMatrix projector(const CVector& v) { return v * v.adjoint(); }

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix direct_sum(const CMatrix& a, const CMatrix& b) {
  CMatrix out = CMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace qextrap
