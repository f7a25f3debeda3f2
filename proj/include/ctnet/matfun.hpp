#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace ctnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// ---------------------------------------------------------------------------
// Quadrature

struct QuadRule {
  Vector nodes;
  Vector weights;
};

// Gauss-Legendre rule with m points on [a, b].
QuadRule gauss_legendre(int m, double a, double b);

// ---------------------------------------------------------------------------
// Spectra

// Distinct eigenvalues with multiplicities (values within cluster_tol of each
// other are merged; complex values come in conjugate pairs for real input).
struct Spectrum {
  CVector values;
  std::vector<int> multiplicities;

  int degree() const;  // sum of multiplicities
};

// All n eigenvalues, unclustered.
CVector eigenvalues_raw(const Matrix& X);

Spectrum eigenvalues(const Matrix& X, double cluster_tol = 1e-9);

// ---------------------------------------------------------------------------
// Matrix functions

// Matrix exponential, scaling and squaring with a degree-13 Pade approximant.
Matrix expm(const Matrix& X);

// Principal matrix logarithm by inverse scaling and squaring (product-form
// Denman-Beavers square roots followed by a [7/7] Pade approximant).
// Throws BranchCutError when an eigenvalue lies on the closed negative real
// axis, InvalidInputError when X is singular or not square.
Matrix logm_principal(const Matrix& X);

// Frechet derivative of expm at X in direction E, via the exponential of the
// 2n x 2n block upper-triangular embedding of (X, E).
Matrix frechet_exp(const Matrix& X, const Matrix& E);

// Frechet derivative of the principal logarithm at X in direction E
// (Gauss-Legendre quadrature of the integral representation; 16 nodes).
Matrix frechet_log(const Matrix& X, const Matrix& E);

// psi(z) = (e^z - 1)/z with a series fallback near z = 0.
std::complex<double> psi1(std::complex<double> z);

// The n^2 x n^2 matrix K(X) satisfying K(X) vec(E) = vec(L_exp(X, E)).
// Spectral construction when X is diagonalizable with a well conditioned
// eigenbasis, otherwise an augmented-exponential fallback.
Matrix kronecker_exp_operator(const Matrix& X);

// Integral of expm(s X) ds over [0, h], via an augmented exponential.
Matrix phi_integral(double h, const Matrix& X);

// Integral of expm(s X) R R^T expm(s X)^T ds over [0, h] (Van Loan block
// method); the result is symmetrized.
Matrix lyapunov_integral(double h, const Matrix& X, const Matrix& R);

// Integral of s * K(s X) ds over [0, h] by 16-node Gauss-Legendre quadrature.
Matrix sk_integral(double h, const Matrix& X);
Matrix sk_integral_serial(double h, const Matrix& X);

// ---------------------------------------------------------------------------
// Shared helpers (used by the reconstruction Jacobians and alias machinery)

// Eigendecomposition bundle for the spectral fast path.  valid == false means
// the eigenbasis is too ill conditioned (or defective) to trust.
struct EigDecomp {
  CMatrix Z;      // eigenvectors, columns
  CMatrix Zinv;
  CVector lambda;
  double cond = 0.0;
  bool valid = false;
};

// Decompose X and decide whether the spectral path is trustworthy.
EigDecomp eig_decomp(const Matrix& X, double cond_limit = 1e7);

// Divided-difference table F with F(i,j) = psi-type quotient
// (e^{li} - e^{lj})/(li - lj), diagonal e^{li}; L_exp(X, E) =
// Z (F o (Zinv E Z)) Zinv when the decomposition is valid.
CMatrix exp_divided_differences(const CVector& lambda);

}  // namespace ctnet
