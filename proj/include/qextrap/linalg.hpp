#pragma once

#include <Eigen/Dense>
#include <complex>

namespace qextrap {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

double hermiticity_defect(const CMatrix& m);
bool is_hermitian(const CMatrix& m, double tol = 1e-12);

// Smallest eigenvalue of the Hermitian part.
double min_eigenvalue(const CMatrix& m);
double min_eigenvalue(const RMatrix& m);

// Spectral functions of a Hermitian matrix. Eigenvalues below `cutoff` are treated as zero.
CMatrix hermitian_sqrt(const CMatrix& m);
CMatrix hermitian_pinv(const CMatrix& m, double cutoff = 1e-9);
CMatrix hermitian_pinv_sqrt(const CMatrix& m, double cutoff = 1e-9);
CMatrix range_projector(const CMatrix& m, double cutoff = 1e-9);

CMatrix projector(const CVector& v);
CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix direct_sum(const CMatrix& a, const CMatrix& b);

}  // namespace qextrap
