#include "ctnet/simulate.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "ctnet/errors.hpp"

namespace ctnet {

void ExperimentConfig::validate() const {
  if (n < 2) throw InvalidInputError("config: n must be at least 2");
  if (transitions < 1) throw InvalidInputError("config: need at least one transition");
  if (!(density >= 0.0 && density <= 1.0))
    throw InvalidInputError("config: density must lie in [0, 1]");
  if (!no_noise && !std::isfinite(snr_db))
    throw InvalidInputError("config: snr_db must be finite (use no_noise to disable noise)");
  if (!(init_var > 0.0)) throw InvalidInputError("config: init_var must be positive");
  if (!(auto_h_factor > 0.0 && auto_h_factor < 1.0))
    throw InvalidInputError("config: auto_h_factor must lie in (0, 1)");
  if (input_kind == InputKind::square_wave && input_amplitude == 0.0)
    throw InvalidInputError("config: square wave amplitude must be nonzero");
}

double SquareWave::operator()(double t) const {
  double phase = std::fmod(t, period);
  if (phase < 0.0) phase += period;
  return phase < 0.5 * period ? amplitude : -amplitude;
}

CTSystem random_stable_sparse(int n, double density, Rng& rng) {
  if (n < 2) throw InvalidInputError("random_stable_sparse: n must be at least 2");
  if (!(density >= 0.0 && density <= 1.0))
    throw InvalidInputError("random_stable_sparse: density must lie in [0, 1]");
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Matrix A = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) A(i, i) = rng.uniform(-2.0, -0.5);
    // cycle backbone keeps the graph connected
    for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = rng.sign() * rng.uniform(0.5, 1.5);
    A(n - 1, 0) = rng.sign() * rng.uniform(0.5, 1.5);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        if (i == j || A(i, j) != 0.0) continue;
        if (rng.bernoulli(density)) A(i, j) = rng.sign() * rng.uniform(0.5, 1.5);
      }
    // hide the backbone with a consistent relabeling P A P^T
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(0, i)]);
    Matrix Ap(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) Ap(perm[i], perm[j]) = A(i, j);
    if (eigenvalues_raw(Ap).real().maxCoeff() < 0.0) {
      CTSystem sys;
      sys.A = Ap;
      sys.B = Matrix(n, 0);
      sys.R = Matrix::Identity(n, n);
      return sys;
    }
  }
  throw GenerationError("random_stable_sparse: no stable draw within 1000 attempts");
}

double critical_period(const Matrix& A) {
  const CVector lam = eigenvalues_raw(A);
  const double wmax = lam.imag().cwiseAbs().maxCoeff();
  if (wmax == 0.0) return std::numeric_limits<double>::infinity();
  return M_PI / wmax;
}

TimeSeries simulate_series(const CTSystem& sys, const ExperimentConfig& cfg, Rng& rng) {
  sys.validate();
  cfg.validate();
  if (sys.n() != cfg.n) throw InvalidInputError("simulate_series: config n mismatch");
  double h = cfg.h;
  if (!(h > 0.0)) {
    const double hmax = critical_period(sys.A);
    h = std::isfinite(hmax) ? cfg.auto_h_factor * hmax : 1.0;
  }
  const int n = sys.n(), m = sys.m(), N = cfg.transitions;
  const DTSystem d = discretize(sys, h);
  Matrix noise_chol = Matrix::Zero(n, n);
  if (!cfg.no_noise && sys.R.cwiseAbs().maxCoeff() > 0.0) {
    Eigen::LLT<Matrix> llt(d.Rd);
    if (llt.info() != Eigen::Success) {
      // Rd can be semidefinite to rounding; fall back to a shifted factor
      const double shift = 1e-12 * std::max(1.0, d.Rd.diagonal().maxCoeff());
      Eigen::LLT<Matrix> llt2(Matrix(d.Rd + shift * Matrix::Identity(n, n)));
      if (llt2.info() != Eigen::Success)
        throw NumericError("simulate_series: discrete noise covariance not PSD");
      noise_chol = llt2.matrixL();
    } else {
      noise_chol = llt.matrixL();
    }
  }
  TimeSeries ts;
  ts.t0 = 0.0;
  ts.h = h;
  ts.Y.resize(n, N + 1);
  ts.U.resize(m, m > 0 ? N + 1 : 0);
  const double period = cfg.input_period > 0.0 ? cfg.input_period : 4.0 * h;
  const SquareWave wave{period, cfg.input_amplitude};
  const double sd0 = std::sqrt(cfg.init_var);
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = sd0 * rng.normal();
  ts.Y.col(0) = x;
  Vector xi(n);
  for (int k = 0; k < N; ++k) {
    const double t = ts.t0 + k * h;
    Vector next = d.Ad * x;
    if (m > 0) {
      Vector u(m);
      if (cfg.input_kind == InputKind::square_wave)
        for (int c = 0; c < m; ++c) u[c] = wave(t);
      else
        u.setZero();
      ts.U.col(k) = u;
      next += d.Bd * u;
    }
    if (noise_chol.cwiseAbs().maxCoeff() > 0.0) {
      for (int i = 0; i < n; ++i) xi[i] = rng.normal();
      next += noise_chol * xi;
    }
    x = next;
    ts.Y.col(k + 1) = x;
  }
  if (m > 0) {
    // last input column is the hold value at the final time, for completeness
    const double tN = ts.t0 + N * h;
    for (int c = 0; c < m; ++c)
      ts.U(c, N) = cfg.input_kind == InputKind::square_wave ? wave(tN) : 0.0;
  }
  return ts;
}

Dataset make_dataset(const ExperimentConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  Dataset ds;
  ds.truth = random_stable_sparse(cfg.n, cfg.density, rng);
  if (cfg.input_kind != InputKind::none) ds.truth.B = Matrix::Identity(cfg.n, cfg.n);
  ds.config = cfg;
  double h = cfg.h;
  if (!(h > 0.0)) {
    const double hmax = critical_period(ds.truth.A);
    h = std::isfinite(hmax) ? cfg.auto_h_factor * hmax : 1.0;
    ds.config.h = h;
  }
  if (cfg.input_period <= 0.0) ds.config.input_period = 4.0 * h;
  if (cfg.no_noise) {
    ds.truth.R = Matrix::Zero(cfg.n, cfg.n);
  } else {
    // scale R = c I so the mean diagonal of Rd matches the target SNR
    // against the initial-state variance
    const Matrix rd_base = lyapunov_integral(h, ds.truth.A, Matrix::Identity(cfg.n, cfg.n));
    const double target = cfg.init_var * std::pow(10.0, -cfg.snr_db / 10.0);
    const double base = rd_base.diagonal().mean();
    if (!(base > 0.0)) throw NumericError("make_dataset: degenerate base noise covariance");
    ds.truth.R = std::sqrt(target / base) * Matrix::Identity(cfg.n, cfg.n);
  }
  ds.series = simulate_series(ds.truth, ds.config, rng);
  return ds;
}

}  // namespace ctnet
