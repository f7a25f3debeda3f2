#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ctnet/matfun.hpp"

namespace ctnet {

using SpMat = Eigen::SparseMatrix<double>;

struct QpSettings {
  double eps_abs = 1e-8;
  double eps_rel = 1e-6;
  int max_iter = 50000;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;          // over-relaxation
  bool adaptive_rho = true;
  int check_interval = 25;     // residual / rho update cadence
  bool polish = false;         // active-set refinement after convergence
};

struct QpResult {
  Vector x, z, y;
  int iterations = 0;
  double prim_res = 0.0;
  double dual_res = 0.0;
  bool converged = false;
  bool polished = false;
};

// Operator-splitting solver for  min 1/2 x'Px + q'x  s.t.  lo <= Ax <= up.
// The default KKT step factors P + sigma I + rho A'A densely; subclasses can
// exploit structure by overriding factor / kkt_solve / pmul.
class AdmmQp {
 public:
  AdmmQp(Matrix P, Vector q, SpMat A, Vector lo, Vector up, QpSettings settings);
  virtual ~AdmmQp() = default;

  void warm_start(const QpResult& prev);
  QpResult solve();

 protected:
  virtual void factor(double rho);
  virtual Vector kkt_solve(const Vector& rhs) const;
  virtual Vector pmul(const Vector& x) const;

  Matrix P_;
  Vector q_;
  SpMat A_;
  SpMat At_;
  Vector lo_, up_;
  QpSettings st_;

 private:
  void polish(QpResult& res) const;

  Eigen::LLT<Matrix> llt_;
  Vector x_, z_, y_;
  bool warm_ = false;
};

// Convenience wrapper.
QpResult solve_qp(const Matrix& P, const Vector& q, const SpMat& A, const Vector& lo,
                  const Vector& up, const QpSettings& settings = {},
                  const QpResult* warm = nullptr);

}  // namespace ctnet
