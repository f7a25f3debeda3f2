#include "ctnet/reconstruct.hpp"

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <vector>

#include "ctnet/errors.hpp"

namespace ctnet {

namespace {

Vector flatten(const Matrix& M) {
  return Eigen::Map<const Vector>(M.data(), M.size());
}

Matrix unflatten(const Vector& v, int rows, int cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

double spectral_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(M).singularValues()[0];
}

}  // namespace

RegressionData RegressionData::from_series(const TimeSeries& ts) {
  ts.validate();
  RegressionData d;
  const int N = ts.transitions();
  d.h = ts.h;
  d.Xplus = ts.Y.rightCols(N);
  d.Xminus = ts.Y.leftCols(N);
  d.Uminus = ts.m() > 0 ? Matrix(ts.U.leftCols(N)) : Matrix(0, N);
  return d;
}

Vector residual(const Matrix& A, const Matrix& B, const RegressionData& d) {
  const int n = d.n();
  if (A.rows() != n || A.cols() != n) throw InvalidInputError("residual: A must be n x n");
  Matrix E = d.Xplus - expm(d.h * A) * d.Xminus;
  if (d.has_input()) {
    if (B.rows() != n || B.cols() != d.m()) throw InvalidInputError("residual: B must be n x m");
    E.noalias() -= phi_integral(d.h, A) * (B * d.Uminus);
  }
  return flatten(E);
}

Matrix jacobian_A(const Matrix& A, const Matrix& B, const RegressionData& d) {
  const int n = d.n(), N = d.N();
  if (A.rows() != n || A.cols() != n) throw InvalidInputError("jacobian_A: A must be n x n");
  const double h = d.h;
  const Matrix hA = h * A;
  Matrix J(static_cast<Eigen::Index>(n) * N, static_cast<Eigen::Index>(n) * n);
  const EigDecomp ed = eig_decomp(hA);
  if (ed.valid) {
    // column for direction E_ij assembled in the eigenbasis:
    //   d expm(hA)/dA_ij Xminus = h Z diag(u_i) F diag(v_j) (Zinv Xminus)
    // with u_i = Zinv e_i, v_j = Z^T e_j and F the divided-difference table;
    // the input correction integrates the same expression over [0, h].
    const CMatrix F = exp_divided_differences(ed.lambda);
    const CMatrix G = ed.Zinv * d.Xminus;
    CMatrix G2;
    std::vector<CMatrix> Fq;
    QuadRule q;
    if (d.has_input()) {
      q = gauss_legendre(16, 0.0, h);
      G2 = ed.Zinv * (B * d.Uminus);
      Fq.reserve(16);
      for (int k = 0; k < 16; ++k)
        Fq.push_back(exp_divided_differences(CVector((q.nodes[k] / h) * ed.lambda)));
    }
    CMatrix W(n, N), T(n, N);
    Matrix Tr(n, N);
    for (int j = 0; j < n; ++j) {
      const CVector v = ed.Z.row(j).transpose();
      W.noalias() = h * (F * (v.asDiagonal() * G));
      if (d.has_input())
        for (int k = 0; k < 16; ++k)
          W.noalias() += (q.weights[k] * q.nodes[k]) * (Fq[k] * (v.asDiagonal() * G2));
      for (int i = 0; i < n; ++i) {
        const CVector u = ed.Zinv.col(i);
        T.noalias() = ed.Z * (u.asDiagonal() * W);
        Tr = -T.real();
        J.col(static_cast<Eigen::Index>(j) * n + i) = flatten(Tr);
      }
    }
    return J;
  }
  // literal fallback for defective spectra
  const Matrix K = kronecker_exp_operator(hA);
  Matrix SK;
  if (d.has_input()) SK = sk_integral(h, hA / h);
  const Matrix BU = d.has_input() ? Matrix(B * d.Uminus) : Matrix();
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(n) * n; ++c) {
    const Matrix Lc = unflatten(K.col(c), n, n);
    Matrix col = -h * (Lc * d.Xminus);
    if (d.has_input()) col.noalias() -= unflatten(SK.col(c), n, n) * BU;
    J.col(c) = flatten(col);
  }
  return J;
}

Matrix jacobian_B(const Matrix& A, const RegressionData& d) {
  const int n = d.n(), N = d.N(), m = d.m();
  if (m == 0) throw InvalidInputError("jacobian_B: series has no input");
  const Matrix Phi = phi_integral(d.h, A);
  Matrix J(static_cast<Eigen::Index>(n) * N, static_cast<Eigen::Index>(n) * m);
  Matrix col(n, N);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) {
      col.noalias() = -Phi.col(i) * d.Uminus.row(j);
      J.col(static_cast<Eigen::Index>(j) * n + i) = flatten(col);
    }
  return J;
}

Matrix jacobian_B_diag(const Matrix& A, const RegressionData& d) {
  const int n = d.n(), N = d.N();
  if (d.m() != n) throw InvalidInputError("jacobian_B_diag: needs m == n");
  const Matrix Phi = phi_integral(d.h, A);
  Matrix J(static_cast<Eigen::Index>(n) * N, n);
  Matrix col(n, N);
  for (int i = 0; i < n; ++i) {
    col.noalias() = -Phi.col(i) * d.Uminus.row(i);
    J.col(i) = flatten(col);
  }
  return J;
}

// ---------------------------------------------------------------------------
// Subproblem.

namespace {

// ADMM KKT system for the lifted subproblem exploits its block structure:
// M = blkdiag(C, (sigma+2rho)I, (sigma+2rho)I) + rho a a^T with a = (gbar, 0,
// lambda w), so one dense Cholesky of C plus Sherman-Morrison per solve.
class LiftedKkt final : public AdmmQp {
 public:
  LiftedKkt(const Matrix& H, Vector q, SpMat A, Vector lo, Vector up, QpSettings st, Vector gbar,
            Vector w, double lambda, Eigen::Index npen)
      : AdmmQp(Matrix(), std::move(q), std::move(A), std::move(lo), std::move(up), st),
        H_(H),
        gbar_(std::move(gbar)),
        w_(std::move(w)),
        lam_(lambda),
        d_(H.rows()),
        npen_(npen) {}

 protected:
  Vector pmul(const Vector& x) const override {
    Vector out = Vector::Zero(x.size());
    out.head(d_).noalias() = H_ * x.head(d_);
    return out;
  }

  void factor(double rho) override {
    rho_ = rho;
    uv_ = st_.sigma + 2.0 * rho;
    Matrix C = H_;
    C.diagonal().array() += st_.sigma;
    for (Eigen::Index i = 0; i < npen_; ++i) C(i, i) += 2.0 * rho * (1.0 + w_[i]);
    cllt_.compute(C);
    if (cllt_.info() != Eigen::Success)
      throw SolverError("solve_subproblem: KKT factorization failed");
    cig_ = cllt_.solve(gbar_);
    denom_ = 1.0 + rho * (gbar_.dot(cig_) + lam_ * lam_ * w_.sum() / uv_);
  }

  Vector kkt_solve(const Vector& rhs) const override {
    Vector bp = cllt_.solve(rhs.head(d_));
    const double t = gbar_.dot(bp) + lam_ * w_.dot(rhs.tail(npen_)) / uv_;
    const double coef = rho_ * t / denom_;
    Vector out(rhs.size());
    out.head(d_) = bp - coef * cig_;
    out.segment(d_, npen_) = rhs.segment(d_, npen_) / uv_;
    out.tail(npen_) = rhs.tail(npen_) / uv_ - (coef * lam_ / uv_) * w_;
    return out;
  }

 private:
  Matrix H_;  // 2 J^T J
  Vector gbar_, w_;
  double lam_;
  Eigen::Index d_, npen_;
  Eigen::LLT<Matrix> cllt_;
  Vector cig_;
  double rho_ = 0.0, uv_ = 1.0, denom_ = 1.0;
};

double constraint_value(const Vector& gbar, const Vector& w, double lambda, const Vector& p,
                        Eigen::Index npen) {
  double c = gbar.dot(p);
  for (Eigen::Index i = 0; i < npen; ++i)
    if (w[i] != 0.0) c += lambda * std::abs(p[i]);
  return c;
}

// Exact stationarity solve on one candidate support classification.
bool polish_support_at(const Matrix& H, const Vector& g0, const Vector& a, Eigen::Index npen,
                       double lambda, const Vector& theta, double tol, Vector* out) {
  const Eigen::Index d = g0.size();
  std::vector<Eigen::Index> free_ix;
  std::vector<double> sgn;
  std::vector<Eigen::Index> fixed_ix;
  for (Eigen::Index i = 0; i < npen; ++i) {
    if (lambda == 0.0 || std::abs(theta[i]) > tol) {
      free_ix.push_back(i);
      sgn.push_back(theta[i] > 0.0 ? 1.0 : (theta[i] < 0.0 ? -1.0 : 0.0));
    } else {
      fixed_ix.push_back(i);
    }
  }
  for (Eigen::Index i = npen; i < d; ++i) {
    free_ix.push_back(i);
    sgn.push_back(0.0);
  }
  const Eigen::Index nf = static_cast<Eigen::Index>(free_ix.size());
  Vector p = Vector::Zero(d);
  for (Eigen::Index i : fixed_ix) p[i] = -a[i];
  Vector rhs(nf);
  Matrix Hff(nf, nf);
  for (Eigen::Index r = 0; r < nf; ++r) {
    double acc = -g0[free_ix[r]] - lambda * sgn[r];
    for (Eigen::Index i : fixed_ix) acc -= H(free_ix[r], i) * p[i];
    rhs[r] = acc;
    for (Eigen::Index c = 0; c < nf; ++c) Hff(r, c) = H(free_ix[r], free_ix[c]);
  }
  Eigen::LDLT<Matrix> ldlt(Hff);
  if (ldlt.info() != Eigen::Success) return false;
  const Vector pf = ldlt.solve(rhs);
  if (!pf.allFinite()) return false;
  for (Eigen::Index r = 0; r < nf; ++r) p[free_ix[r]] = pf[r];
  // verify the full KKT system of the unconstrained model
  const Vector grad = H * p + g0;
  const double tau = 1e-8 * std::max({1.0, g0.cwiseAbs().maxCoeff(), lambda});
  for (Eigen::Index r = 0; r < nf; ++r) {
    const Eigen::Index i = free_ix[r];
    if (i < npen && lambda > 0.0) {
      const double th = a[i] + p[i];
      const double s = th > 0.0 ? 1.0 : (th < 0.0 ? -1.0 : 0.0);
      if (s != sgn[r] && sgn[r] != 0.0) return false;  // support flipped
      if (std::abs(grad[i] + lambda * s) > tau) return false;
    } else {
      if (std::abs(grad[i]) > tau) return false;
    }
  }
  for (Eigen::Index i : fixed_ix)
    if (std::abs(grad[i]) > lambda + tau) return false;
  *out = p;
  return true;
}

// The ADMM iterate only resolves the support up to its residual scale (which
// grows with lambda), so widen the zero classification until some candidate
// support passes the exact KKT verification above.
bool polish_support(const Matrix& H, const Vector& g0, const Vector& a, Eigen::Index npen,
                    double lambda, const Vector& p_admm, Vector* out) {
  const Vector theta = a + p_admm.head(npen);
  const double base = 1e-7 * std::max(1.0, theta.cwiseAbs().maxCoeff());
  for (double mult : {1.0, 1e2, 1e4, 1e6}) {
    if (polish_support_at(H, g0, a, npen, lambda, theta, base * mult, out)) return true;
    if (lambda == 0.0) break;  // the classification does not depend on tol then
  }
  return false;
}

}  // namespace

SubproblemResult solve_subproblem(const Vector& r, const Matrix& J, const Vector& a,
                                  Eigen::Index npen, double lambda, const QpSettings& settings,
                                  const QpResult* warm, QpResult* warm_out) {
  const Eigen::Index d = J.cols();
  if (r.size() != J.rows()) throw InvalidInputError("solve_subproblem: residual size mismatch");
  if (npen < 1 || npen > d || a.size() != npen)
    throw InvalidInputError("solve_subproblem: penalized block mismatch");
  if (lambda < 0.0) throw InvalidInputError("solve_subproblem: lambda must be >= 0");
  const Matrix Hraw = 2.0 * (J.transpose() * J);
  const Vector g0raw = 2.0 * (J.transpose() * r);
  // Cost normalization: ADMM stalls when the quadratic block and the l1
  // costs live on very different scales, so solve in units where the largest
  // cost term is O(1) and convert the reported quantities back.
  const double cscale = std::max({1.0, lambda, Hraw.cwiseAbs().maxCoeff(),
                                  g0raw.size() > 0 ? g0raw.cwiseAbs().maxCoeff() : 0.0});
  const Matrix H = Hraw / cscale;
  const Vector g0 = g0raw / cscale;
  const double lam = lambda / cscale;
  Vector gbar = g0;
  Vector w = Vector::Zero(npen);
  for (Eigen::Index i = 0; i < npen; ++i) {
    if (a[i] > 0.0) gbar[i] += lam;
    else if (a[i] < 0.0) gbar[i] -= lam;
    else w[i] = 1.0;
  }
  const double inf = std::numeric_limits<double>::infinity();
  const Eigen::Index nx = d + 2 * npen;
  const Eigen::Index mrows = 4 * npen + 1;
  Vector q = Vector::Zero(nx);
  q.head(d) = g0;
  q.segment(d, npen).setConstant(lam);
  Vector lo(mrows), up(mrows);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(8 * npen + d));
  for (Eigen::Index i = 0; i < npen; ++i) {
    trip.emplace_back(i, i, 1.0);                       // p_i - u_i <= -a_i
    trip.emplace_back(i, d + i, -1.0);
    lo[i] = -inf;
    up[i] = -a[i];
    trip.emplace_back(npen + i, i, 1.0);                // p_i + u_i >= -a_i
    trip.emplace_back(npen + i, d + i, 1.0);
    lo[npen + i] = -a[i];
    up[npen + i] = inf;
    if (w[i] != 0.0) trip.emplace_back(2 * npen + i, i, 1.0);  // w p_i - v_i <= 0
    trip.emplace_back(2 * npen + i, d + npen + i, -1.0);
    lo[2 * npen + i] = -inf;
    up[2 * npen + i] = 0.0;
    if (w[i] != 0.0) trip.emplace_back(3 * npen + i, i, 1.0);  // w p_i + v_i >= 0
    trip.emplace_back(3 * npen + i, d + npen + i, 1.0);
    lo[3 * npen + i] = 0.0;
    up[3 * npen + i] = inf;
  }
  for (Eigen::Index k = 0; k < d; ++k)
    if (gbar[k] != 0.0) trip.emplace_back(4 * npen, k, gbar[k]);
  for (Eigen::Index i = 0; i < npen; ++i)
    if (w[i] != 0.0) trip.emplace_back(4 * npen, d + npen + i, lam);
  lo[4 * npen] = -inf;
  up[4 * npen] = 0.0;
  SpMat Acon(mrows, nx);
  Acon.setFromTriplets(trip.begin(), trip.end());

  SubproblemResult res;
  QpResult qr;
  double feas_shift = 0.0;
  for (int attempt = 0; attempt < 3; ++attempt) {
    Vector up2 = up;
    up2[4 * npen] = -feas_shift;
    QpSettings st = settings;
    if (attempt > 0) {
      // the 1e-8 gate below lives in original units, so a large cost scale
      // needs a correspondingly tighter QP solve before giving up
      const double tighten = attempt == 1 ? 1e-3 : 1e-5;
      st.eps_abs = std::max(settings.eps_abs * tighten, 1e-13);
      st.eps_rel = std::max(settings.eps_rel * tighten, 1e-13);
    }
    LiftedKkt solver(H, q, Acon, lo, up2, st, gbar, w, lam, npen);
    if (attempt == 0 && warm) solver.warm_start(*warm);
    if (attempt > 0) solver.warm_start(qr);
    qr = solver.solve();
    Vector p = qr.x.head(d);
    const double cval = cscale * constraint_value(gbar, w, lam, p, npen);
    Vector polished;
    if (polish_support(H, g0, a, npen, lam, p, &polished)) {
      const double cpol = cscale * constraint_value(gbar, w, lam, polished, npen);
      if (cpol <= 1e-8) {
        res.p = polished;
        res.directional_derivative = cpol;
        res.constraint_violation = std::max(0.0, cpol);
        res.qp_iterations = qr.iterations;
        res.qp_prim_res = qr.prim_res;
        res.qp_dual_res = qr.dual_res;
        res.polished = true;
        if (warm_out) *warm_out = qr;
        return res;
      }
    }
    if (cval <= 1e-8) {
      res.p = p;
      res.directional_derivative = cval;
      res.constraint_violation = std::max(0.0, cval);
      res.qp_iterations = qr.iterations;
      res.qp_prim_res = qr.prim_res;
      res.qp_dual_res = qr.dual_res;
      if (warm_out) *warm_out = qr;
      return res;
    }
    if (std::getenv("CTNET_TRACE"))
      std::fprintf(stderr,
                   "[sub] attempt=%d cscale=%.3e |gbar|=%.3e lam=%.3e |p|=%.3e cval=%.3e "
                   "qp(it=%d pr=%.2e dr=%.2e) polish=%d\n",
                   attempt, cscale, gbar.cwiseAbs().maxCoeff(), lam, p.cwiseAbs().maxCoeff(),
                   cval, qr.iterations, qr.prim_res, qr.dual_res,
                   int(polish_support(H, g0, a, npen, lam, p, &polished)));
    // ask only for half the margin the solve actually demonstrated; a shift
    // past the attainable optimum would make the QP infeasible
    const double margin = constraint_value(gbar, w, lam, p, npen);
    feas_shift = margin < 0.0 ? -margin / 2.0 : 0.0;
  }
  throw SolverError("solve_subproblem: could not reach a feasible descent step");
}

// ---------------------------------------------------------------------------
// Outer Gauss-Newton loop.

void initialize(const RegressionData& d, Matrix* A0, Matrix* B0, bool* log_ok) {
  const int n = d.n(), m = d.m(), N = d.N();
  if (N < 1) throw InvalidInputError("initialize: empty regression data");
  Matrix W(n + m, N);
  W.topRows(n) = d.Xminus;
  if (m > 0) W.bottomRows(m) = d.Uminus;
  const Matrix thetaT =
      W.transpose().completeOrthogonalDecomposition().solve(d.Xplus.transpose());
  const Matrix theta = thetaT.transpose();
  bool ok = true;
  try {
    *A0 = logm_principal(theta.leftCols(n)) / d.h;
  } catch (const Error&) {
    *A0 = Matrix::Zero(n, n);
    ok = false;
  }
  if (log_ok) *log_ok = ok;
  if (m > 0) {
    const Matrix Bdh = theta.rightCols(m);
    const Matrix Phi = phi_integral(d.h, *A0);
    const Matrix B = Eigen::PartialPivLU<Matrix>(Phi).solve(Bdh);
    *B0 = B.allFinite() ? B : Matrix(Bdh / d.h);
  } else {
    *B0 = Matrix(n, 0);
  }
}

namespace {

void check_options(const SolverOptions& opt) {
  if (opt.lambda < 0.0) throw InvalidInputError("options: lambda must be >= 0");
  if (!(opt.armijo_alpha > 0.0 && opt.armijo_alpha < 0.5))
    throw InvalidInputError("options: armijo_alpha must lie in (0, 0.5)");
  if (!(opt.backtrack_beta > 0.0 && opt.backtrack_beta < 1.0))
    throw InvalidInputError("options: backtrack_beta must lie in (0, 1)");
  if (opt.max_iter < 1) throw InvalidInputError("options: max_iter must be >= 1");
  if (!(opt.step_tol > 0.0)) throw InvalidInputError("options: step_tol must be positive");
}

}  // namespace

double directional_derivative(const Matrix& Ak, const Vector& grad_phi, const Vector& p,
                              double lambda) {
  const Eigen::Index npen = Ak.size();
  if (grad_phi.size() != p.size() || p.size() < npen)
    throw InvalidInputError("directional_derivative: size mismatch");
  double v = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    double g = grad_phi[i];
    if (i < npen) {
      const double ai = Ak.data()[i];
      if (ai > 0.0)
        g += lambda;
      else if (ai < 0.0)
        g -= lambda;
      else
        v += lambda * std::abs(p[i]);
    }
    v += g * p[i];
  }
  return v;
}

double line_search(const std::function<double(double)>& trial, double f0, double fprime,
                   double alpha, double beta, double min_step) {
  if (fprime > 0.0) throw InvalidInputError("line_search: not a descent direction");
  double s = 1.0;
  while (s >= min_step) {
    if (trial(s) <= f0 + alpha * s * fprime + 1e-13 * std::max(1.0, std::abs(f0))) return s;
    s *= beta;
  }
  return 0.0;
}

SolveReport reconstruct_from(const RegressionData& d, Matrix A0, Matrix B0,
                             const SolverOptions& opt) {
  check_options(opt);
  const int n = d.n(), m = d.m(), N = d.N();
  if (opt.mode != EstimationMode::a_only && m == 0)
    throw InvalidInputError("reconstruct: joint estimation requires an input signal");
  if (opt.mode == EstimationMode::joint_diag_b && m != n)
    throw InvalidInputError("reconstruct: diagonal-B estimation requires m == n");
  Matrix A = std::move(A0);
  Matrix B = m > 0 ? std::move(B0) : Matrix(n, 0);
  if (A.rows() != n || A.cols() != n) throw InvalidInputError("reconstruct: A0 must be n x n");
  if (m > 0 && (B.rows() != n || B.cols() != m))
    throw InvalidInputError("reconstruct: B0 must be n x m");

  const Eigen::Index npen = static_cast<Eigen::Index>(n) * n;
  SolveReport rep;
  rep.lambda = opt.lambda;
  rep.mode = opt.mode;
  auto fval = [&](const Matrix& Ax, const Matrix& Bx, Vector* rout) {
    Vector rr = residual(Ax, Bx, d);
    const double v = rr.squaredNorm() + opt.lambda * Ax.cwiseAbs().sum();
    if (rout) *rout = std::move(rr);
    return v;
  };
  Vector r;
  double f = fval(A, B, &r);
  rep.objective.push_back(f);
  auto assemble_jacobian = [&](const Matrix& Ax, const Matrix& Bx) {
    if (opt.mode == EstimationMode::a_only) return jacobian_A(Ax, Bx, d);
    const Matrix JA = jacobian_A(Ax, Bx, d);
    const Matrix JB =
        opt.mode == EstimationMode::joint ? jacobian_B(Ax, d) : jacobian_B_diag(Ax, d);
    Matrix J(JA.rows(), JA.cols() + JB.cols());
    J << JA, JB;
    return J;
  };
  auto kkt_from = [&](const Vector& g, const Matrix& Ax) {
    double kkt = 0.0;
    const Eigen::Map<const Vector> av(Ax.data(), npen);
    for (Eigen::Index i = 0; i < npen; ++i) {
      if (av[i] > 0.0) kkt = std::max(kkt, std::abs(g[i] + opt.lambda));
      else if (av[i] < 0.0) kkt = std::max(kkt, std::abs(g[i] - opt.lambda));
      else kkt = std::max(kkt, std::max(0.0, std::abs(g[i]) - opt.lambda));
    }
    for (Eigen::Index i = npen; i < g.size(); ++i) kkt = std::max(kkt, std::abs(g[i]));
    return kkt;
  };
  QpResult warm;
  bool have_warm = false;
  bool stopped = false;
  for (int k = 0; k < opt.max_iter && !stopped; ++k) {
    const Matrix J = assemble_jacobian(A, B);
    const Vector avec = Eigen::Map<const Vector>(A.data(), npen);
    SubproblemResult sub = solve_subproblem(r, J, avec, npen, opt.lambda, opt.qp,
                                            have_warm ? &warm : nullptr, &warm);
    have_warm = true;
    rep.constraint_violation.push_back(sub.constraint_violation);
    rep.qp_iterations.push_back(sub.qp_iterations);
    const Matrix dA = unflatten(sub.p.head(npen), n, n);
    Matrix dB;
    if (opt.mode == EstimationMode::joint) dB = unflatten(sub.p.tail(d.m() * n), n, d.m());
    const double fprime = std::min(0.0, sub.directional_derivative);
    Matrix At, Bt;
    Vector rnew;
    double fnew = f;
    auto trial = [&](double s) {
      At = A + s * dA;
      Bt = B;
      if (opt.mode == EstimationMode::joint) Bt += s * dB;
      if (opt.mode == EstimationMode::joint_diag_b) Bt.diagonal() += s * sub.p.tail(n);
      fnew = fval(At, Bt, &rnew);
      return fnew;
    };
    const double s =
        line_search(trial, f, fprime, opt.armijo_alpha, opt.backtrack_beta, opt.min_step);
    if (s == 0.0) {
      rep.termination = "line_search_floor";
      stopped = true;
      break;
    }
    A = std::move(At);
    B = std::move(Bt);
    const double step = spectral_norm(s * dA);
    rep.step_norm.push_back(step);
    rep.step_size.push_back(s);
    rep.objective.push_back(fnew);
    r = std::move(rnew);
    f = fnew;
    ++rep.iterations;
    if (step < opt.step_tol) {
      // a damped tiny step is not a stationarity certificate on its own,
      // so stop only once the first-order conditions actually hold
      const Matrix Jn = assemble_jacobian(A, B);
      if (kkt_from(2.0 * (Jn.transpose() * r), A) <= opt.kkt_tol) {
        rep.termination = "step_tol";
        stopped = true;
      }
    }
  }
  if (rep.termination.empty()) rep.termination = "max_iter";
  // final first-order conditions
  {
    const Matrix J = assemble_jacobian(A, B);
    rep.kkt_violation = kkt_from(2.0 * (J.transpose() * r), A);
  }
  const Matrix E = unflatten(r, n, N);
  rep.Rd_hat = (E * E.transpose()) / static_cast<double>(N);
  rep.final_objective = f;
  rep.A = std::move(A);
  rep.B = std::move(B);
  return rep;
}

SolveReport reconstruct(const TimeSeries& series, const SolverOptions& opt) {
  const RegressionData d = RegressionData::from_series(series);
  Matrix A0, B0;
  bool log_ok = true;
  initialize(d, &A0, &B0, &log_ok);
  SolveReport rep = reconstruct_from(d, std::move(A0), std::move(B0), opt);
  rep.init_log_ok = log_ok;
  return rep;
}

}  // namespace ctnet
