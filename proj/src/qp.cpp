#include "ctnet/qp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ctnet/errors.hpp"

namespace ctnet {

AdmmQp::AdmmQp(Matrix P, Vector q, SpMat A, Vector lo, Vector up, QpSettings settings)
    : P_(std::move(P)),
      q_(std::move(q)),
      A_(std::move(A)),
      lo_(std::move(lo)),
      up_(std::move(up)),
      st_(settings) {
  const Eigen::Index n = q_.size();
  const Eigen::Index m = A_.rows();
  if (P_.size() > 0 && (P_.rows() != n || P_.cols() != n))
    throw InvalidInputError("qp: P shape mismatch");
  if (A_.cols() != n || lo_.size() != m || up_.size() != m)
    throw InvalidInputError("qp: constraint shape mismatch");
  for (Eigen::Index i = 0; i < m; ++i)
    if (lo_[i] > up_[i]) throw InvalidInputError("qp: lower bound exceeds upper bound");
  At_ = A_.transpose();
  x_ = Vector::Zero(n);
  z_ = Vector::Zero(m);
  y_ = Vector::Zero(m);
}

void AdmmQp::warm_start(const QpResult& prev) {
  if (prev.x.size() == x_.size() && prev.z.size() == z_.size() && prev.y.size() == y_.size()) {
    x_ = prev.x;
    z_ = prev.z;
    y_ = prev.y;
    warm_ = true;
  }
}

void AdmmQp::factor(double rho) {
  Matrix M = rho * Matrix(At_ * A_);
  if (P_.size() > 0) M += P_;
  M.diagonal().array() += st_.sigma;
  llt_.compute(M);
  if (llt_.info() != Eigen::Success) throw SolverError("qp: KKT factorization failed");
}

Vector AdmmQp::kkt_solve(const Vector& rhs) const { return llt_.solve(rhs); }

Vector AdmmQp::pmul(const Vector& x) const {
  if (P_.size() == 0) return Vector::Zero(x.size());
  return P_ * x;
}

QpResult AdmmQp::solve() {
  double rho = st_.rho;
  factor(rho);
  if (!warm_) z_ = A_ * x_;
  QpResult res;
  const double inf_gate = 1e20;
  int it = 0;
  for (; it < st_.max_iter; ++it) {
    // x update
    const Vector rhs = st_.sigma * x_ - q_ + At_ * (rho * z_ - y_);
    const Vector xt = kkt_solve(rhs);
    const Vector zt = A_ * xt;
    // relaxation
    const Vector xr = st_.alpha * xt + (1.0 - st_.alpha) * x_;
    const Vector zr = st_.alpha * zt + (1.0 - st_.alpha) * z_;
    x_ = xr;
    const Vector z_prev = z_;
    z_ = (zr + y_ / rho).cwiseMax(lo_.cwiseMax(-inf_gate)).cwiseMin(up_.cwiseMin(inf_gate));
    y_ += rho * (zr - z_);
    if ((it + 1) % st_.check_interval != 0 && it + 1 != st_.max_iter) continue;
    // residuals on the unrelaxed iterate
    const Vector Ax = A_ * x_;
    const Vector Px = pmul(x_);
    const Vector Aty = At_ * y_;
    const double prim = (Ax - z_).cwiseAbs().maxCoeff();
    const double dual = (Px + q_ + Aty).cwiseAbs().maxCoeff();
    const double prim_scale =
        std::max(Ax.cwiseAbs().maxCoeff(), z_.size() ? z_.cwiseAbs().maxCoeff() : 0.0);
    const double dual_scale = std::max({Px.cwiseAbs().maxCoeff(), Aty.cwiseAbs().maxCoeff(),
                                        q_.cwiseAbs().maxCoeff()});
    const double eps_prim = st_.eps_abs + st_.eps_rel * prim_scale;
    const double eps_dual = st_.eps_abs + st_.eps_rel * dual_scale;
    res.prim_res = prim;
    res.dual_res = dual;
    if (prim <= eps_prim && dual <= eps_dual) {
      res.converged = true;
      ++it;
      break;
    }
    if (st_.adaptive_rho && prim_scale > 0.0 && dual_scale > 0.0) {
      const double pr = prim / std::max(prim_scale, 1e-30);
      const double dr = dual / std::max(dual_scale, 1e-30);
      const double ratio = std::sqrt(pr / std::max(dr, 1e-30));
      if (ratio > 5.0 || ratio < 0.2) {
        rho = std::clamp(rho * ratio, 1e-6, 1e6);
        factor(rho);
      }
    }
    (void)z_prev;
  }
  res.x = x_;
  res.z = z_;
  res.y = y_;
  res.iterations = it;
  if (res.converged && st_.polish) polish(res);
  return res;
}

void AdmmQp::polish(QpResult& res) const {
  // Equality-constrained refinement on the active set identified by the
  // multiplier signs, as in OSQP.  Kept to small problems: the dense KKT
  // factorization below is cubic in nx + #active.
  const Eigen::Index n = q_.size();
  const Eigen::Index m = A_.rows();
  std::vector<Eigen::Index> active;
  std::vector<double> bound;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (res.y[i] < -0.0 && lo_[i] > -1e19) {
      active.push_back(i);
      bound.push_back(lo_[i]);
    } else if (res.y[i] > 0.0 && up_[i] < 1e19) {
      active.push_back(i);
      bound.push_back(up_[i]);
    }
  }
  const Eigen::Index na = static_cast<Eigen::Index>(active.size());
  if (n + na > 1200) return;
  Matrix K = Matrix::Zero(n + na, n + na);
  if (P_.size() > 0) K.topLeftCorner(n, n) = P_;
  const double delta = 1e-9;
  K.topLeftCorner(n, n).diagonal().array() += delta;
  const Matrix Adense(A_);
  Matrix Aact = Matrix::Zero(na, n);
  for (Eigen::Index k = 0; k < na; ++k) Aact.row(k) = Adense.row(active[k]);
  K.block(n, 0, na, n) = Aact;
  K.block(0, n, n, na) = Aact.transpose();
  K.block(n, n, na, na).diagonal().array() -= delta;
  Vector rhs(n + na);
  rhs.head(n) = -q_;
  for (Eigen::Index k = 0; k < na; ++k) rhs[n + k] = bound[k];
  Eigen::PartialPivLU<Matrix> lu(K);
  Vector sol = lu.solve(rhs);
  // one step of iterative refinement against the unregularized system
  Vector resid(n + na);
  resid.head(n) = -q_ - (pmul(sol.head(n)) + Aact.transpose() * sol.tail(na));
  resid.tail(na) = rhs.tail(na) - Aact * sol.head(n);
  sol += lu.solve(resid);
  const Vector xp = sol.head(n);
  Vector yp = Vector::Zero(m);
  for (Eigen::Index k = 0; k < na; ++k) yp[active[k]] = sol[n + k];
  const Vector Axp = A_ * xp;
  // accept only if feasible and at least as optimal as the ADMM iterate
  const double viol = ((Axp - up_).cwiseMax(0.0) + (lo_ - Axp).cwiseMax(0.0)).maxCoeff();
  const double dual = (pmul(xp) + q_ + At_ * yp).cwiseAbs().maxCoeff();
  if (viol <= std::max(res.prim_res, st_.eps_abs) && dual <= std::max(res.dual_res, st_.eps_abs)) {
    res.x = xp;
    res.z = Axp.cwiseMax(lo_).cwiseMin(up_);
    res.y = yp;
    res.prim_res = viol;
    res.dual_res = dual;
    res.polished = true;
  }
}

QpResult solve_qp(const Matrix& P, const Vector& q, const SpMat& A, const Vector& lo,
                  const Vector& up, const QpSettings& settings, const QpResult* warm) {
  AdmmQp solver(P, q, A, lo, up, settings);
  if (warm) solver.warm_start(*warm);
  return solver.solve();
}

}  // namespace ctnet
