#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ctnet/qp.hpp"
#include "ctnet/sysmodel.hpp"

namespace ctnet {

enum class EstimationMode { a_only, joint, joint_diag_b };

// One-step regression blocks cut from a sampled trajectory.
struct RegressionData {
  Matrix Xplus;   // n x N, columns x_1 .. x_N
  Matrix Xminus;  // n x N, columns x_0 .. x_{N-1}
  Matrix Uminus;  // m x N, inputs held over each interval (m = 0 without input)
  double h = 0.0;

  int n() const { return static_cast<int>(Xplus.rows()); }
  int m() const { return static_cast<int>(Uminus.rows()); }
  int N() const { return static_cast<int>(Xplus.cols()); }
  bool has_input() const { return m() > 0; }

  static RegressionData from_series(const TimeSeries& ts);
};

// Stacked one-step prediction residual vec(Xplus - expm(hA) Xminus - Phi(h,A) B Uminus).
Vector residual(const Matrix& A, const Matrix& B, const RegressionData& d);

// d(residual)/d(vec A), algebraically -h (Xminus^T (x) I) K(hA) minus the
// input correction through the Phi integral.  Assembled column-wise in the
// eigenbasis of hA when that is well conditioned.
Matrix jacobian_A(const Matrix& A, const Matrix& B, const RegressionData& d);

// d(residual)/d(vec B) = -(Uminus^T (x) Phi(h,A)).
Matrix jacobian_B(const Matrix& A, const RegressionData& d);

// d(residual)/d(diag B), column i = -vec(Phi(:,i) Uminus(i,:)); needs m == n.
Matrix jacobian_B_diag(const Matrix& A, const RegressionData& d);

// One-sided derivative of the penalized objective at Ak along p: on the
// penalized block, gbar_i = grad_phi_i + lambda * sgn(Ak_i) for nonzero
// entries plus lambda |p_i| where Ak_i == 0; unpenalized coordinates (p may
// extend past vec(Ak) in joint modes) contribute grad_phi_i p_i.
double directional_derivative(const Matrix& Ak, const Vector& grad_phi, const Vector& p,
                              double lambda);

// Backtracking Armijo search: largest s in {1, beta, beta^2, ...} >= min_step
// with trial(s) <= f0 + alpha * s * fprime (tiny relative slack for round-off);
// returns 0 when the floor is reached without acceptance.  Requires
// fprime <= 0 (throws InvalidInputError otherwise).
double line_search(const std::function<double(double)>& trial, double f0, double fprime,
                   double alpha, double beta, double min_step = 1e-12);

struct SolverOptions {
  double lambda = 0.01;
  EstimationMode mode = EstimationMode::a_only;
  int max_iter = 50;
  double step_tol = 1e-5;      // stop when ||A_{k+1} - A_k||_2 drops below
  double armijo_alpha = 0.25;  // sufficient-decrease fraction, in (0, 0.5)
  double backtrack_beta = 0.5;
  double min_step = 1e-12;     // line-search floor; reaching it ends the run
  double epsilon = 1e-6;       // reserved smoothing constant, not used by the QP path
  double kkt_tol = 1e-6;
  QpSettings qp;
};

struct SubproblemResult {
  Vector p;                     // step over all free parameters
  double constraint_violation = 0.0;  // positive part of gbar'p + lambda ||W p||_1
  double directional_derivative = 0.0;
  int qp_iterations = 0;
  double qp_prim_res = 0.0;
  double qp_dual_res = 0.0;
  bool polished = false;
};

// One damped-Newton subproblem: minimize ||r + J p||^2 + lambda ||a + p_pen||_1
// subject to the descent constraint, via the lifted QP; followed by an
// active-support refinement that solves the stationarity system exactly.
// a = current penalized parameter values (leading n_pen entries of the step
// coordinates); warm/warm_out carry ADMM state across outer iterations.
SubproblemResult solve_subproblem(const Vector& r, const Matrix& J, const Vector& a,
                                  Eigen::Index n_pen, double lambda, const QpSettings& settings,
                                  const QpResult* warm = nullptr, QpResult* warm_out = nullptr);

struct SolveReport {
  Matrix A;
  Matrix B;
  Matrix Rd_hat;                       // residual covariance at the solution
  std::vector<double> objective;       // f(A_k), including the initial point
  std::vector<double> step_norm;       // spectral norms of accepted steps
  std::vector<double> step_size;       // line-search step lengths
  std::vector<double> constraint_violation;
  std::vector<int> qp_iterations;
  int iterations = 0;
  std::string termination;             // step_tol | max_iter | line_search_floor
  double kkt_violation = 0.0;
  double final_objective = 0.0;
  bool init_log_ok = true;             // principal log of the OLS estimate existed
  double lambda = 0.0;
  EstimationMode mode = EstimationMode::a_only;
};

// OLS initialization: [Ad Bd] from least squares, A0 = logm(Ad)/h (zero on
// branch failure), B0 from the Phi integral.
void initialize(const RegressionData& d, Matrix* A0, Matrix* B0, bool* log_ok);

SolveReport reconstruct(const TimeSeries& series, const SolverOptions& opt);
SolveReport reconstruct_from(const RegressionData& d, Matrix A0, Matrix B0,
                             const SolverOptions& opt);

}  // namespace ctnet
