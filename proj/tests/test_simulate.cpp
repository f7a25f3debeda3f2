#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"

#include "ctnet/errors.hpp"
#include "ctnet/matfun.hpp"
#include "ctnet/rng.hpp"
#include "ctnet/simulate.hpp"
#include "ctnet/sysmodel.hpp"

using namespace ctnet;

namespace {
long nnz(const Matrix& M) {
  long c = 0;
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      if (M(i, j) != 0.0) ++c;
  return c;
}
}  // namespace

TEST_SUITE("simulate") {

TEST_CASE("random_stable_sparse backbone at density zero") {
  Rng rng(301);
  for (int n : {2, 5, 9}) {
    const CTSystem sys = random_stable_sparse(n, 0.0, rng);
    CHECK(nnz(sys.A) == 2 * n);  // n diagonal entries plus an n-cycle
    CHECK(eigenvalues_raw(sys.A).real().maxCoeff() < 0.0);
    CHECK(sys.B.cols() == 0);
    CHECK((sys.R - Matrix::Identity(n, n)).norm() == 0.0);
    for (int i = 0; i < n; ++i) CHECK(sys.A(i, i) < 0.0);
  }
}

TEST_CASE("random_stable_sparse density raises the edge count within bounds") {
  Rng rng(302);
  const int n = 10;
  const CTSystem sys = random_stable_sparse(n, 0.5, rng);
  const long c = nnz(sys.A);
  CHECK(c >= 2 * n);
  CHECK(c <= n * n);
  CHECK(c > 2 * n + 5);  // 0.5 over ~72 free slots, vanishing chance of <= 5 hits
}

TEST_CASE("random_stable_sparse is deterministic in the generator state") {
  Rng a(303), b(303);
  const CTSystem s1 = random_stable_sparse(6, 0.3, a);
  const CTSystem s2 = random_stable_sparse(6, 0.3, b);
  CHECK((s1.A - s2.A).norm() == 0.0);
  Rng c(304);
  const CTSystem s3 = random_stable_sparse(6, 0.3, c);
  CHECK((s1.A - s3.A).norm() != 0.0);
}

TEST_CASE("random_stable_sparse argument checks") {
  Rng rng(305);
  CHECK_THROWS_AS(random_stable_sparse(1, 0.0, rng), InvalidInputError);
  CHECK_THROWS_AS(random_stable_sparse(4, -0.1, rng), InvalidInputError);
  CHECK_THROWS_AS(random_stable_sparse(4, 1.5, rng), InvalidInputError);
}

TEST_CASE("critical_period from the fastest oscillation") {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 1) = -3.0;
  A(1, 0) = 3.0;
  A -= 0.2 * Matrix::Identity(2, 2);
  CHECK(critical_period(A) == doctest::Approx(M_PI / 3.0).epsilon(1e-12));

  Matrix D = Matrix::Zero(3, 3);
  D(0, 0) = -1.0;
  D(1, 1) = -2.0;
  D(2, 2) = -0.5;
  CHECK(std::isinf(critical_period(D)));
}

TEST_CASE("simulate_series without noise follows the exact discrete recursion") {
  Rng gen(306);
  CTSystem sys = random_stable_sparse(4, 0.2, gen);
  ExperimentConfig cfg;
  cfg.n = 4;
  cfg.transitions = 12;
  cfg.h = 0.7;
  cfg.no_noise = true;
  Rng rng(307);
  const TimeSeries ts = simulate_series(sys, cfg, rng);
  CHECK(ts.h == 0.7);
  CHECK(ts.Y.cols() == 13);
  CHECK(ts.U.size() == 0);
  const Matrix Ad = discretize(sys, 0.7).Ad;
  Matrix x = ts.Y.col(0);
  for (int k = 1; k <= 12; ++k) {
    x = (Ad * x).eval();
    CHECK((ts.Y.col(k) - x).norm() < 1e-10 * std::max(1.0, x.norm()));
  }
}

TEST_CASE("square wave input enters through the hold recursion") {
  CTSystem sys;
  sys.A = Matrix::Zero(2, 2);
  sys.B = Matrix::Identity(2, 2);
  sys.R = Matrix::Zero(2, 2);
  ExperimentConfig cfg;
  cfg.n = 2;
  cfg.transitions = 6;
  cfg.h = 0.5;
  cfg.no_noise = true;
  cfg.input_kind = InputKind::square_wave;
  cfg.input_period = 1.0;  // = 2h, so the sign flips every step
  cfg.input_amplitude = 1.5;
  cfg.init_var = 1e-12;
  Rng rng(308);
  const TimeSeries ts = simulate_series(sys, cfg, rng);
  CHECK(ts.U.rows() == 2);
  CHECK(ts.U.cols() == 7);
  for (int k = 0; k <= 6; ++k) {
    const double want = (k % 2 == 0) ? 1.5 : -1.5;  // +amp on [0, period/2)
    CHECK(ts.U(0, k) == want);
    CHECK(ts.U(1, k) == want);
  }
  // A = 0, B = I: x_{k+1} = x_k + h u_k
  for (int k = 0; k < 6; ++k) {
    const Vector want = ts.Y.col(k) + 0.5 * ts.U.col(k);
    CHECK((ts.Y.col(k + 1) - want).norm() < 1e-12);
  }
}

TEST_CASE("simulate_series resolves the automatic step from the spectrum") {
  CTSystem sys;
  sys.A = Matrix::Zero(2, 2);
  sys.A << -0.1, -2.0, 2.0, -0.1;
  sys.B = Matrix(2, 0);
  sys.R = Matrix::Zero(2, 2);
  ExperimentConfig cfg;
  cfg.n = 2;
  cfg.transitions = 3;
  cfg.h = 0.0;
  cfg.auto_h_factor = 0.8;
  cfg.no_noise = true;
  Rng rng(309);
  CHECK(simulate_series(sys, cfg, rng).h == doctest::Approx(0.8 * M_PI / 2.0).epsilon(1e-12));

  sys.A = Matrix::Zero(2, 2);
  sys.A(0, 0) = -1.0;
  sys.A(1, 1) = -3.0;
  Rng rng2(310);
  CHECK(simulate_series(sys, cfg, rng2).h == 1.0);  // fallback when nothing oscillates
}

TEST_CASE("make_dataset hits the requested noise-to-signal ratio exactly") {
  ExperimentConfig cfg;
  cfg.n = 6;
  cfg.density = 0.2;
  cfg.transitions = 10;
  cfg.h = 0.6;
  cfg.snr_db = 7.0;
  cfg.init_var = 2.5;
  cfg.seed = 311;
  const Dataset ds = make_dataset(cfg);
  const Matrix rd = lyapunov_integral(0.6, ds.truth.A, ds.truth.R);
  const double target = 2.5 * std::pow(10.0, -0.7);
  CHECK(rd.diagonal().mean() == doctest::Approx(target).epsilon(1e-9));
  CHECK(ds.config.h == 0.6);
  CHECK(ds.config.input_period == doctest::Approx(2.4));  // resolved default 4h
}

TEST_CASE("make_dataset empirical residual covariance matches its model") {
  ExperimentConfig cfg;
  cfg.n = 3;
  cfg.density = 0.0;
  cfg.transitions = 20000;
  cfg.h = 0.4;
  cfg.snr_db = 0.0;
  cfg.init_var = 1.0;
  cfg.seed = 312;
  const Dataset ds = make_dataset(cfg);
  const DTSystem d = discretize(ds.truth, 0.4);
  const Matrix& Y = ds.series.Y;
  const Matrix E = Y.rightCols(Y.cols() - 1) - d.Ad * Y.leftCols(Y.cols() - 1);
  const Matrix S = (E * E.transpose()) / static_cast<double>(E.cols());
  CHECK(std::abs(S.diagonal().mean() - d.Rd.diagonal().mean()) < 0.1 * d.Rd.diagonal().mean());
}

TEST_CASE("make_dataset is reproducible and honors no_noise") {
  ExperimentConfig cfg;
  cfg.n = 5;
  cfg.density = 0.15;
  cfg.transitions = 8;
  cfg.seed = 313;
  cfg.no_noise = true;
  cfg.snr_db = std::numeric_limits<double>::quiet_NaN();  // legal when noise is off
  const Dataset a = make_dataset(cfg);
  const Dataset b = make_dataset(cfg);
  CHECK((a.truth.A - b.truth.A).norm() == 0.0);
  CHECK((a.series.Y - b.series.Y).norm() == 0.0);
  CHECK(a.truth.R.norm() == 0.0);
  CHECK(a.config.h > 0.0);  // resolved, not the sentinel
}

TEST_CASE("make_dataset with an input uses the identity input map") {
  ExperimentConfig cfg;
  cfg.n = 4;
  cfg.density = 0.1;
  cfg.transitions = 6;
  cfg.h = 0.5;
  cfg.no_noise = true;
  cfg.input_kind = InputKind::square_wave;
  cfg.input_amplitude = 2.0;
  cfg.seed = 314;
  const Dataset ds = make_dataset(cfg);
  CHECK((ds.truth.B - Matrix::Identity(4, 4)).norm() == 0.0);
  CHECK(ds.series.U.rows() == 4);
  CHECK(ds.series.U.cwiseAbs().maxCoeff() == 2.0);
}

TEST_CASE("config validation rejects bad fields") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  auto broken = [&](auto&& mutate) {
    ExperimentConfig c = cfg;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), InvalidInputError);
  };
  broken([](ExperimentConfig& c) { c.n = 1; });
  broken([](ExperimentConfig& c) { c.transitions = 0; });
  broken([](ExperimentConfig& c) { c.density = -0.2; });
  broken([](ExperimentConfig& c) { c.density = 1.2; });
  broken([](ExperimentConfig& c) { c.snr_db = std::numeric_limits<double>::infinity(); });
  broken([](ExperimentConfig& c) { c.init_var = 0.0; });
  broken([](ExperimentConfig& c) { c.auto_h_factor = 1.0; });
  broken([](ExperimentConfig& c) {
    c.input_kind = InputKind::square_wave;
    c.input_amplitude = 0.0;
  });

  Rng rng(315);
  CTSystem sys = random_stable_sparse(3, 0.0, rng);
  ExperimentConfig mism;
  mism.n = 4;
  CHECK_THROWS_AS(simulate_series(sys, mism, rng), InvalidInputError);
}

}  // TEST_SUITE
