#include <cmath>
#include <complex>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"

#include "ctnet/aliasing.hpp"
#include "ctnet/errors.hpp"
#include "ctnet/matfun.hpp"
#include "ctnet/rng.hpp"
#include "ctnet/simulate.hpp"
#include "ctnet/sysmodel.hpp"

using namespace ctnet;

namespace {

Matrix rotation(double w) {
  Matrix A(2, 2);
  A << 0.0, -w, w, 0.0;
  return A;
}

// damped four-cycle whose fast pair sits outside the strip at h = 1
Matrix damped_cycle4() {
  Matrix C = Matrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) C(i, (i + 1) % 4) = 1.0;
  return Matrix(-0.1 * Matrix::Identity(4, 4) + 4.0 * C);
}

}  // namespace

TEST_SUITE("aliasing") {

TEST_CASE("sampling_bound from the spectrum") {
  Matrix A(2, 2);
  A << -1.0, -2.0, 2.0, -1.0;  // eigenvalues -1 +- 2i
  const SamplingBound b = sampling_bound(A);
  CHECK(b.max_abs_imag == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(b.omega_min == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(b.h_max == doctest::Approx(M_PI / 2.0).epsilon(1e-10));

  const SamplingBound r = sampling_bound(rotation(M_PI / 2.0));
  CHECK(r.h_max == doctest::Approx(2.0).epsilon(1e-10));

  Matrix D = Matrix::Zero(3, 3);
  D.diagonal() << -1.0, -2.0, -0.3;
  const SamplingBound d = sampling_bound(D);
  CHECK(d.max_abs_imag == 0.0);
  CHECK(d.omega_min == 0.0);
  CHECK(std::isinf(d.h_max));
}

TEST_CASE("in_strip is strict at the boundary") {
  const Matrix A = rotation(M_PI / 2.0);  // h_max = 2
  CHECK(in_strip(A, 1.9));
  CHECK_FALSE(in_strip(A, 2.0));
  CHECK_FALSE(in_strip(A, 2.5));
  CHECK(in_strip(Matrix::Zero(2, 2), 1e6));  // real spectrum never aliases
  CHECK_THROWS_AS(in_strip(A, 0.0), InvalidInputError);
}

TEST_CASE("alias_test accepts the true model on a clean probe") {
  Rng gen(501);
  CTSystem sys = random_stable_sparse(3, 0.2, gen);
  ExperimentConfig cfg;
  cfg.n = 3;
  cfg.transitions = 20;
  cfg.h = 0.7;
  cfg.no_noise = true;
  Rng rng(502);
  const TimeSeries probe = simulate_series(sys, cfg, rng);
  const AliasTestReport rep = alias_test(sys, 1.0, probe, 0.05);
  CHECK_FALSE(rep.reject);
  CHECK(rep.p_value == 1.0);  // exact predictions, degenerate zero errors
  CHECK(rep.h1 == 1.0);
  CHECK(rep.h2 == 0.7);
  CHECK(rep.errors.rows() == 3);
  CHECK(rep.errors.cols() == 20);
  CHECK(rep.errors.cwiseAbs().maxCoeff() < 1e-9);
  CHECK(rep.per_channel_p.size() == 3);
  // Bonferroni aggregation is n * min over channels, clamped
  CHECK(rep.p_value ==
        doctest::Approx(std::min(1.0, 3.0 * rep.per_channel_p.minCoeff())).epsilon(1e-12));
}

TEST_CASE("alias_test rejects a model with a systematic prediction bias") {
  CTSystem truth;
  truth.A = Matrix::Zero(3, 3);  // constant trajectories
  truth.B = Matrix(3, 0);
  truth.R = Matrix::Zero(3, 3);
  ExperimentConfig cfg;
  cfg.n = 3;
  cfg.transitions = 12;
  cfg.h = 0.6;
  cfg.no_noise = true;
  Rng rng(503);
  const TimeSeries probe = simulate_series(truth, cfg, rng);
  CTSystem model = truth;
  model.A = -Matrix::Identity(3, 3);  // predicts decay that never happens
  const AliasTestReport rep = alias_test(model, 1.0, probe, 0.05);
  CHECK(rep.reject);
  // errors are constant up to eps-level drift, so t is astronomically large
  CHECK(rep.p_value < 1e-100);
}

TEST_CASE("alias_test input feedthrough and dimension checks") {
  CTSystem sys;
  sys.A = -0.4 * Matrix::Identity(2, 2);
  sys.B = Matrix::Identity(2, 2);
  sys.R = Matrix::Zero(2, 2);
  ExperimentConfig cfg;
  cfg.n = 2;
  cfg.transitions = 15;
  cfg.h = 0.8;
  cfg.no_noise = true;
  cfg.input_kind = InputKind::square_wave;
  cfg.input_period = 3.0;
  cfg.input_amplitude = 1.0;
  Rng rng(504);
  const TimeSeries probe = simulate_series(sys, cfg, rng);
  CHECK(probe.U.cwiseAbs().maxCoeff() == 1.0);
  const AliasTestReport rep = alias_test(sys, 1.3, probe, 0.05);
  CHECK_FALSE(rep.reject);  // input-aware predictor is exact on its own data
  CHECK(rep.errors.cwiseAbs().maxCoeff() < 1e-9);

  CTSystem wrong_m = sys;
  wrong_m.B = Matrix::Ones(2, 3);
  CHECK_THROWS_AS(alias_test(wrong_m, 1.3, probe, 0.05), InvalidInputError);
}

TEST_CASE("alias_test probe validity gates") {
  Rng gen(505);
  CTSystem sys = random_stable_sparse(2, 0.0, gen);
  ExperimentConfig cfg;
  cfg.n = 2;
  cfg.transitions = 10;
  cfg.h = 1.0;
  cfg.no_noise = true;
  Rng rng(506);
  TimeSeries probe = simulate_series(sys, cfg, rng);

  CHECK_THROWS_AS(alias_test(sys, 0.5, probe, 0.05), InvalidProbeError);   // ratio 2
  CHECK_THROWS_AS(alias_test(sys, 1.0, probe, 0.05), InvalidProbeError);   // ratio 1
  const double h1_near = 1.0 / (3.0 + 1e-11);  // ratio within 1e-9 of 3
  CHECK_THROWS_AS(alias_test(sys, h1_near, probe, 0.05), InvalidProbeError);
  CHECK_NOTHROW(alias_test(sys, 1.6, probe, 0.05));  // ratio 0.625, fine
  CHECK_NOTHROW(alias_test(sys, 2.0, probe, 0.05));  // ratio 0.5: faster probe allowed

  TimeSeries tiny = probe;
  tiny.Y = probe.Y.leftCols(5);  // 4 transitions
  CHECK_THROWS_AS(alias_test(sys, 1.6, tiny, 0.05), InvalidProbeError);

  CHECK_THROWS_AS(alias_test(sys, -1.0, probe, 0.05), InvalidInputError);
  CHECK_THROWS_AS(alias_test(sys, 1.6, probe, 0.0), InvalidInputError);
  CHECK_THROWS_AS(alias_test(sys, 1.6, probe, 1.0), InvalidInputError);
}

TEST_CASE("enumeration of the quarter-turn rotation") {
  const Matrix A = rotation(M_PI / 2.0);
  const Matrix Ad = expm(A);  // h = 1, eigenvalues +-i
  const AliasSet set = enumerate_aliases(Ad, 1.0, 10.0);
  REQUIRE(set.members.size() == 2);
  CHECK(set.members[0].weighted_norm == doctest::Approx(M_PI / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(set.members[1].weighted_norm ==
        doctest::Approx(3.0 * M_PI / std::sqrt(2.0)).epsilon(1e-9));
  // principal member recovers the generator, the other the slow alias
  CHECK((set.members[0].A - A).norm() < 1e-8);
  CHECK((set.members[1].A - rotation(M_PI / 2.0 - 2.0 * M_PI)).norm() < 1e-8);
  CHECK(set.members[0].j.isZero());
  CHECK(set.members[1].j.sum() == 0);
  CHECK(set.members[1].j.cwiseAbs().maxCoeff() == 1);
  for (const AliasMember& m : set.members) {
    CHECK(m.exp_residual < 1e-8);
    CHECK((expm(m.A) - Ad).norm() < 1e-8);
  }
  // the next branch would weigh 5 pi / sqrt(2) ~ 11.1 and must stay excluded
  CHECK(enumerate_aliases(Ad, 1.0, 11.2).members.size() == 3);
}

TEST_CASE("enumeration keeps real-spectrum systems alias-free") {
  Matrix Ad = Matrix::Zero(2, 2);
  Ad.diagonal() << 0.5, 0.2;
  const AliasSet set = enumerate_aliases(Ad, 1.0, 50.0);
  REQUIRE(set.members.size() == 1);
  Matrix want = Matrix::Zero(2, 2);
  want.diagonal() << std::log(0.5), std::log(0.2);
  CHECK((set.members[0].A - want).norm() < 1e-10);
  CHECK(set.members[0].j.isZero());
}

TEST_CASE("enumeration counts match a brute-force scan") {
  Rng rng(507);
  int checked = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const CTSystem sys = random_stable_sparse(4, 0.25, rng);
    const SamplingBound b = sampling_bound(sys.A);
    const double h = std::isfinite(b.h_max) ? 1.5 * b.h_max : 1.0;
    const Matrix Ad = expm(h * sys.A);
    AliasSet set;
    try {
      set = enumerate_aliases(Ad, h, 3.0 * sys.A.norm() + 8.0);
    } catch (const DegenerateSpectrumError&) {
      continue;  // two modes collided onto one DT eigenvalue at this h
    }
    const long want = oracle::alias_count_bruteforce(Ad, h, set.kappa);
    CHECK(static_cast<long>(set.members.size()) == want);
    if (std::isfinite(b.h_max)) {
      CHECK(set.members.size() >= 2);  // sampled past the limit: truth plus principal
      ++checked;
    }
    for (const AliasMember& m : set.members)
      CHECK(m.exp_residual < 1e-6 * std::max(1.0, Ad.norm()));
    // the minimum-norm member is the principal logarithm
    CHECK((set.members[0].A - Matrix(logm_principal(Ad) / h)).norm() <
          1e-7 * std::max(1.0, set.members[0].A.norm()));
  }
  CHECK(checked >= 3);  // the sparse draws oscillate more often than not
}

TEST_CASE("enumeration is monotone in the norm budget") {
  const Matrix Ad = expm(damped_cycle4());
  const AliasSet small = enumerate_aliases(Ad, 1.0, 7.0);
  const AliasSet big = enumerate_aliases(Ad, 1.0, 14.0);
  CHECK(small.members.size() <= big.members.size());
  for (size_t i = 0; i < small.members.size(); ++i) {
    CHECK(small.members[i].weighted_norm ==
          doctest::Approx(big.members[i].weighted_norm).epsilon(1e-12));
    CHECK((small.members[i].A - big.members[i].A).norm() < 1e-12);
  }
  for (size_t i = 1; i < big.members.size(); ++i)
    CHECK(big.members[i - 1].weighted_norm <= big.members[i].weighted_norm);
}

TEST_CASE("enumeration input gates and degeneracy errors") {
  CHECK_THROWS_AS(enumerate_aliases(Matrix::Identity(3, 3), 1.0, 5.0), DegenerateSpectrumError);
  Matrix neg = Matrix::Zero(2, 2);
  neg.diagonal() << -1.0, 2.0;
  CHECK_THROWS_AS(enumerate_aliases(neg, 1.0, 5.0), BranchCutError);
  Matrix sing = Matrix::Zero(2, 2);
  sing.diagonal() << 0.0, 1.0;
  CHECK_THROWS_AS(enumerate_aliases(sing, 1.0, 5.0), InvalidInputError);
  CHECK_THROWS_AS(enumerate_aliases(Matrix::Zero(2, 3), 1.0, 5.0), InvalidInputError);
  CHECK_THROWS_AS(enumerate_aliases(Matrix::Identity(2, 2), 0.0, 5.0), InvalidInputError);
  CHECK_THROWS_AS(enumerate_aliases(Matrix::Identity(2, 2), 1.0, 0.0), InvalidInputError);
  // a huge budget on an oscillating system overflows the candidate box
  const Matrix Ad = expm(damped_cycle4());
  CHECK_THROWS_AS(enumerate_aliases(Ad, 1.0, 1e9), SolverError);
}

TEST_CASE("sparsest member recovers the true network where the principal log is dense") {
  const Matrix A = damped_cycle4();
  const Matrix Ad = expm(A);
  const AliasSet set = enumerate_aliases(Ad, 1.0, 9.0);
  REQUIRE(set.members.size() == 2);
  // principal branch: smaller norm but denser (12 entries; one circulant
  // coefficient vanishes identically by trace alignment); truth: 8 entries
  const long nnz0 = (set.members[0].A.cwiseAbs().array() > 1e-6).count();
  const long nnz1 = (set.members[1].A.cwiseAbs().array() > 1e-6).count();
  CHECK(nnz0 == 12);
  CHECK(nnz1 == 8);
  const AliasMember& sp = sparsest_alias(set, 1e-6);
  CHECK((sp.A - A).norm() < 1e-7);
  CHECK(sp.weighted_norm == doctest::Approx(A.norm()).epsilon(1e-6));

  // zero tolerance large enough blanks everything and falls back to norm order
  const AliasMember& all_zero = sparsest_alias(set, 1e9);
  CHECK(all_zero.weighted_norm == set.members[0].weighted_norm);

  AliasSet empty;
  CHECK_THROWS_AS(sparsest_alias(empty, 1e-6), InvalidInputError);
  CHECK_THROWS_AS(sparsest_alias(set, -1.0), InvalidInputError);
}

TEST_CASE("branch gap quadratic form") {
  Vector beta(2);
  beta << 1.0, -1.0;
  Eigen::VectorXi j = Eigen::VectorXi::Zero(2);
  Eigen::VectorXi delta(2);
  delta << 1, -1;
  CHECK(branch_gap(beta, {1, 1}, j, delta) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(branch_gap(beta, {1, 1}, j, Eigen::VectorXi::Zero(2)) == 0.0);
  // multiplicities scale the form
  CHECK(branch_gap(beta, {2, 2}, j, delta) == doctest::Approx(8.0).epsilon(1e-14));
  CHECK_THROWS_AS(branch_gap(beta, {1}, j, delta), InvalidInputError);

  // additivity: I(j, d) = I(0, j + d) - I(0, j)
  Rng rng(508);
  for (int rep = 0; rep < 20; ++rep) {
    Vector b(3);
    Eigen::VectorXi jj(3), dd(3);
    for (int i = 0; i < 3; ++i) {
      b[i] = rng.uniform(-1.0, 1.0);
      jj[i] = rng.uniform_int(-3, 3);
      dd[i] = rng.uniform_int(-3, 3);
    }
    const std::vector<int> mult{1, 2, 1};
    const double lhs = branch_gap(b, mult, jj, dd);
    const double rhs = branch_gap(b, mult, Eigen::VectorXi::Zero(3), jj + dd) -
                       branch_gap(b, mult, Eigen::VectorXi::Zero(3), jj);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("branch gap predicts the squared norm spacing of enumerated members") {
  const Matrix Ad = expm(rotation(M_PI / 2.0));
  const AliasSet set = enumerate_aliases(Ad, 1.0, 12.0);
  REQUIRE(set.members.size() >= 3);
  const std::vector<int> mult(2, 1);
  for (size_t k = 1; k < set.members.size(); ++k) {
    const Eigen::VectorXi d = set.members[k].j - set.members[0].j;
    const double predicted =
        4.0 * M_PI * M_PI * branch_gap(set.beta, mult, set.members[0].j, d);
    const double wn0 = set.members[0].weighted_norm;
    const double wnk = set.members[k].weighted_norm;
    CHECK(wnk * wnk - wn0 * wn0 == doctest::Approx(predicted).epsilon(1e-9));
  }
}

TEST_CASE("aliases collapse exactly at integer step multiples") {
  const Matrix A1 = rotation(M_PI / 2.0);
  const Matrix A2 = rotation(M_PI / 2.0 - 2.0 * M_PI);
  REQUIRE((expm(A1) - expm(A2)).norm() < 1e-12);  // aliases at h1 = 1
  CHECK((expm(2.0 * A1) - expm(2.0 * A2)).norm() < 1e-10);
  CHECK((expm(3.0 * A1) - expm(3.0 * A2)).norm() < 1e-9);
  CHECK((expm(1.5 * A1) - expm(1.5 * A2)).norm() > 1e-3);
  CHECK((expm(0.5 * A1) - expm(0.5 * A2)).norm() > 1e-3);
}

TEST_CASE("strip membership decides uniqueness of the reconstruction") {
  // inside the strip the principal log of the sampled map returns the truth;
  // outside it lands on a different alias
  Rng rng(509);
  for (int trial = 0; trial < 30; ++trial) {
    const CTSystem sys = random_stable_sparse(3, 0.3, rng);
    const SamplingBound b = sampling_bound(sys.A);
    if (!std::isfinite(b.h_max)) continue;
    const double h_in = 0.9 * b.h_max;
    const Matrix rec_in = logm_principal(expm(h_in * sys.A)) / h_in;
    CHECK((rec_in - sys.A).norm() < 1e-7 * std::max(1.0, sys.A.norm()));
    const double h_out = 1.4 * b.h_max;
    const Matrix rec_out = logm_principal(expm(h_out * sys.A)) / h_out;
    CHECK((rec_out - sys.A).norm() > 1e-3);
  }
}

}  // TEST_SUITE
