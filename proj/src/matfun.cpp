#include "ctnet/matfun.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <omp.h>

#include "ctnet/errors.hpp"

namespace ctnet {

namespace {

void check_square(const char* who, const Matrix& X) {
  if (X.rows() != X.cols() || X.rows() < 1)
    throw InvalidInputError(std::string(who) + ": matrix must be square and nonempty");
  if (!X.allFinite())
    throw InvalidInputError(std::string(who) + ": matrix has non-finite entries");
}

// Complex Kronecker product.
CMatrix ckron(const CMatrix& A, const CMatrix& B) {
  CMatrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

}  // namespace

QuadRule gauss_legendre(int m, double a, double b) {
  if (m < 1) throw InvalidInputError("gauss_legendre: need at least one node");
  QuadRule r;
  r.nodes.resize(m);
  r.weights.resize(m);
  // Nodes on [-1, 1] by Newton iteration from the Chebyshev initial guess.
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Legendre recurrence: p1 = P_m(x), pp = P_m'(x).
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    // Map to [a, b]; nodes come out in descending order of the guess, store
    // symmetric partner as well.
    r.nodes[i] = x;
    r.nodes[m - 1 - i] = -x;
    r.weights[i] = w;
    r.weights[m - 1 - i] = w;
  }
  if (m % 2 == 1) {  // central node of odd rules is exactly 0
    r.nodes[m / 2] = 0.0;
  }
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < m; ++i) {
    r.nodes[i] = mid + half * r.nodes[i];
    r.weights[i] *= half;
  }
  return r;
}

int Spectrum::degree() const {
  int d = 0;
  for (int m : multiplicities) d += m;
  return d;
}

CVector eigenvalues_raw(const Matrix& X) {
  check_square("eigenvalues", X);
  Eigen::EigenSolver<Matrix> es(X, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericError("eigenvalues: QR iteration failed");
  return es.eigenvalues();
}

Spectrum eigenvalues(const Matrix& X, double cluster_tol) {
  CVector raw = eigenvalues_raw(X);
  const Eigen::Index n = raw.size();
  std::vector<int> order(n);
  for (Eigen::Index i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (raw[a].real() != raw[b].real()) return raw[a].real() < raw[b].real();
    return raw[a].imag() < raw[b].imag();
  });
  Spectrum s;
  std::vector<std::complex<double>> vals;
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::complex<double> v = raw[order[k]];
    if (!vals.empty() && std::abs(v - vals.back()) <= cluster_tol) {
      // merge into the running cluster (kept at the first representative)
      s.multiplicities.back() += 1;
    } else {
      vals.push_back(v);
      s.multiplicities.push_back(1);
    }
  }
  s.values.resize(static_cast<Eigen::Index>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) s.values[static_cast<Eigen::Index>(i)] = vals[i];
  return s;
}

// ---------------------------------------------------------------------------
// expm: scaling and squaring, degree-13 diagonal Pade approximant.

namespace {

constexpr double kTheta13 = 5.371920351148152;

Matrix pade13(const Matrix& A) {
  static const double b[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix A2 = A * A;
  const Matrix A4 = A2 * A2;
  const Matrix A6 = A4 * A2;
  const Matrix U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 +
                        b[3] * A2 + b[1] * I);
  const Matrix V =
      A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  Eigen::PartialPivLU<Matrix> lu(V - U);
  return lu.solve(V + U);
}

}  // namespace

Matrix expm(const Matrix& X) {
  check_square("expm", X);
  const double norm1 = X.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > kTheta13) s = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  Matrix F = pade13(X / std::ldexp(1.0, s));
  for (int i = 0; i < s; ++i) F = F * F;
  return F;
}

// ---------------------------------------------------------------------------
// logm: inverse scaling and squaring.

namespace {

// Principal square root by the product form of the Denman-Beavers iteration.
Matrix sqrtm_db(const Matrix& A) {
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  Matrix M = A, Y = A;
  for (int it = 0; it < 100; ++it) {
    if (!M.allFinite()) break;
    const Matrix Minv = Eigen::PartialPivLU<Matrix>(M).solve(I);
    Y = 0.5 * (Y + Y * Minv);
    M = 0.5 * (I + 0.5 * (M + Minv));
    if ((M - I).cwiseAbs().maxCoeff() < 1e-14) return Y;
  }
  // Quadratic convergence means 100 iterations only run out for genuinely
  // pathological inputs.
  if ((M - I).cwiseAbs().maxCoeff() < 1e-9) return Y;
  throw NumericError("logm: matrix square root iteration did not converge");
}

}  // namespace

Matrix logm_principal(const Matrix& X) {
  check_square("logm", X);
  const CVector lam = eigenvalues_raw(X);
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (std::abs(lam[i]) < 1e-14 * scale)
      throw InvalidInputError("logm: matrix is singular");
    if (std::abs(lam[i].imag()) < 1e-10 && lam[i].real() < 0.0)
      throw BranchCutError("logm: eigenvalue on the negative real axis, principal branch undefined");
  }
  const Eigen::Index n = X.rows();
  const Matrix I = Matrix::Identity(n, n);
  Matrix T = X;
  int k = 0;
  while ((T - I).cwiseAbs().colwise().sum().maxCoeff() >= 0.25) {
    if (k >= 64) throw NumericError("logm: inverse scaling did not contract");
    T = sqrtm_db(T);
    ++k;
  }
  // [7/7] Pade approximant of log(I + Y) in partial-fraction form.
  const Matrix Y = T - I;
  const QuadRule q = gauss_legendre(7, 0.0, 1.0);
  Matrix L = Matrix::Zero(n, n);
  for (int j = 0; j < 7; ++j) {
    L += q.weights[j] * Eigen::PartialPivLU<Matrix>(I + q.nodes[j] * Y).solve(Y);
  }
  return std::ldexp(1.0, k) * L;
}

// ---------------------------------------------------------------------------
// Frechet derivatives.

Matrix frechet_exp(const Matrix& X, const Matrix& E) {
  check_square("frechet_exp", X);
  if (E.rows() != X.rows() || E.cols() != X.cols())
    throw InvalidInputError("frechet_exp: direction shape mismatch");
  const Eigen::Index n = X.rows();
  Matrix M = Matrix::Zero(2 * n, 2 * n);
  M.topLeftCorner(n, n) = X;
  M.topRightCorner(n, n) = E;
  M.bottomRightCorner(n, n) = X;
  return expm(M).topRightCorner(n, n);
}

Matrix frechet_log(const Matrix& X, const Matrix& E) {
  check_square("frechet_log", X);
  if (E.rows() != X.rows() || E.cols() != X.cols())
    throw InvalidInputError("frechet_log: direction shape mismatch");
  const CVector lam = eigenvalues_raw(X);
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (std::abs(lam[i].imag()) < 1e-10 && lam[i].real() <= 0.0)
      throw BranchCutError("frechet_log: eigenvalue on the closed negative real axis");
  const Eigen::Index n = X.rows();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix D = X - I;
  const QuadRule q = gauss_legendre(16, 0.0, 1.0);
  Matrix L = Matrix::Zero(n, n);
  for (int j = 0; j < 16; ++j) {
    const Matrix M = q.nodes[j] * D + I;
    Eigen::PartialPivLU<Matrix> lu(M);
    Eigen::PartialPivLU<Matrix> luT(M.transpose());
    // (tD + I)^-1 E (tD + I)^-1
    L += q.weights[j] * luT.solve(lu.solve(E).transpose()).transpose();
  }
  return L;
}

// ---------------------------------------------------------------------------
// Kronecker operator of the exponential.

std::complex<double> psi1(std::complex<double> z) {
  if (std::abs(z) < 0.1) {
    // 1 + z/2! + z^2/3! + ...; 12 terms leave a remainder below 1e-19 here.
    std::complex<double> term(1.0, 0.0), sum(1.0, 0.0);
    for (int k = 2; k <= 13; ++k) {
      term *= z / static_cast<double>(k);
      sum += term;
    }
    return sum;
  }
  return (std::exp(z) - 1.0) / z;
}

CMatrix exp_divided_differences(const CVector& lambda) {
  const Eigen::Index n = lambda.size();
  CMatrix F(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    F(i, i) = std::exp(lambda[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      // (e^a - e^b)/(a - b) = e^b psi1(a - b), stable for close eigenvalues
      const std::complex<double> d = lambda[i] - lambda[j];
      const std::complex<double> v = std::exp(lambda[j]) * psi1(d);
      F(i, j) = v;
      F(j, i) = v;
    }
  }
  return F;
}

EigDecomp eig_decomp(const Matrix& X, double cond_limit) {
  check_square("eig_decomp", X);
  EigDecomp d;
  Eigen::EigenSolver<Matrix> es(X);
  if (es.info() != Eigen::Success) return d;
  d.lambda = es.eigenvalues();
  d.Z = es.eigenvectors();
  Eigen::PartialPivLU<CMatrix> lu(d.Z);
  d.Zinv = lu.solve(CMatrix::Identity(X.rows(), X.rows()));
  d.cond = d.Z.norm() * d.Zinv.norm();
  if (!d.Zinv.allFinite() || d.cond > cond_limit) return d;
  const double resid =
      (d.Z * d.lambda.asDiagonal() * d.Zinv - X.cast<std::complex<double>>()).norm();
  d.valid = resid <= 1e-9 * std::max(1.0, X.norm());
  return d;
}

Matrix kronecker_exp_operator(const Matrix& X) {
  check_square("kronecker_exp_operator", X);
  const Eigen::Index n = X.rows();
  const EigDecomp d = eig_decomp(X);
  if (d.valid) {
    const CMatrix F = exp_divided_differences(d.lambda);
    CVector diag(n * n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) diag[j * n + i] = F(i, j);
    const CMatrix left = ckron(d.Zinv.transpose(), d.Z);
    const CMatrix right = ckron(d.Z.transpose(), d.Zinv);
    return (left * diag.asDiagonal() * right).real();
  }
  // Robust fallback: K(X) = (I (x) e^X) Phi(1, X^T (+) (-X)).
  const Matrix I = Matrix::Identity(n, n);
  Matrix S = Matrix::Zero(n * n, n * n);
  // X^T (x) I - I (x) X
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      S.block(i * n, j * n, n, n) = X(j, i) * I;  // transpose of X in the outer factor
      if (i == j) S.block(i * n, j * n, n, n) -= X;
    }
  const Matrix psi = phi_integral(1.0, S);
  const Matrix eX = expm(X);
  Matrix K(n * n, n * n);
  for (Eigen::Index b = 0; b < n; ++b)
    K.middleRows(b * n, n) = eX * psi.middleRows(b * n, n);
  return K;
}

// ---------------------------------------------------------------------------
// Integrals.

Matrix phi_integral(double h, const Matrix& X) {
  check_square("phi_integral", X);
  if (!(h > 0.0)) throw InvalidInputError("phi_integral: h must be positive");
  const Eigen::Index n = X.rows();
  Matrix M = Matrix::Zero(2 * n, 2 * n);
  M.topLeftCorner(n, n) = h * X;
  M.topRightCorner(n, n) = h * Matrix::Identity(n, n);
  return expm(M).topRightCorner(n, n);
}

Matrix lyapunov_integral(double h, const Matrix& X, const Matrix& R) {
  check_square("lyapunov_integral", X);
  if (!(h > 0.0)) throw InvalidInputError("lyapunov_integral: h must be positive");
  if (R.rows() != X.rows()) throw InvalidInputError("lyapunov_integral: R row mismatch");
  const Eigen::Index n = X.rows();
  Matrix M = Matrix::Zero(2 * n, 2 * n);
  M.topLeftCorner(n, n) = -h * X;
  M.topRightCorner(n, n) = h * (R * R.transpose());
  M.bottomRightCorner(n, n) = h * X.transpose();
  const Matrix F = expm(M);
  const Matrix G = F.topRightCorner(n, n);
  const Matrix F3 = F.bottomRightCorner(n, n);
  const Matrix Rd = F3.transpose() * G;
  return 0.5 * (Rd + Rd.transpose());
}

namespace {

Matrix sk_integral_impl(double h, const Matrix& X, bool parallel) {
  check_square("sk_integral", X);
  if (!(h > 0.0)) throw InvalidInputError("sk_integral: h must be positive");
  const Eigen::Index n = X.rows();
  const QuadRule q = gauss_legendre(16, 0.0, h);
  std::vector<Matrix> slot(16);
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < 16; ++j)
      slot[j] = (q.weights[j] * q.nodes[j]) * kronecker_exp_operator(q.nodes[j] * X);
  } else {
    for (int j = 0; j < 16; ++j)
      slot[j] = (q.weights[j] * q.nodes[j]) * kronecker_exp_operator(q.nodes[j] * X);
  }
  // fixed-order reduction so serial and parallel results are bit-identical
  Matrix acc = Matrix::Zero(n * n, n * n);
  for (int j = 0; j < 16; ++j) acc += slot[j];
  return acc;
}

}  // namespace

Matrix sk_integral(double h, const Matrix& X) { return sk_integral_impl(h, X, true); }

Matrix sk_integral_serial(double h, const Matrix& X) { return sk_integral_impl(h, X, false); }

}  // namespace ctnet
