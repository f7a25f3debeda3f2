#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

#include "ctnet/aliasing.hpp"
#include "ctnet/evalharness.hpp"
#include "ctnet/matfun.hpp"
#include "ctnet/rng.hpp"
#include "ctnet/simulate.hpp"

using namespace ctnet;

// The parallel kernels must return bit-identical results to their serial
// references: work is split by index and reduced in a fixed order.
TEST_SUITE("parallel") {

TEST_CASE("sk_integral parallel equals serial bitwise") {
  Rng rng(1001);
  for (int trial = 0; trial < 3; ++trial) {
    const Matrix X = oracle::random_matrix(rng, 5, 5, 0.8);
    const double h = 0.3 + 0.4 * trial;
    const Matrix par = sk_integral(h, X);
    const Matrix ser = sk_integral_serial(h, X);
    CHECK((par - ser).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("alias enumeration parallel equals serial bitwise") {
  Matrix C = Matrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) C(i, (i + 1) % 4) = 1.0;
  const Matrix A = -0.1 * Matrix::Identity(4, 4) + 4.0 * C;
  const Matrix Ad = expm(A);
  const AliasSet par = enumerate_aliases(Ad, 1.0, 14.0);
  const AliasSet ser = enumerate_aliases_serial(Ad, 1.0, 14.0);
  REQUIRE(par.members.size() == ser.members.size());
  for (size_t i = 0; i < par.members.size(); ++i) {
    CHECK((par.members[i].A - ser.members[i].A).cwiseAbs().maxCoeff() == 0.0);
    CHECK(par.members[i].weighted_norm == ser.members[i].weighted_norm);
    CHECK(par.members[i].exp_residual == ser.members[i].exp_residual);
    CHECK((par.members[i].j - ser.members[i].j).cwiseAbs().maxCoeff() == 0);
  }
}

TEST_CASE("roc evaluation parallel equals serial bitwise") {
  Rng rng(1002);
  Matrix truth_A(6, 6), score(6, 6);
  for (Eigen::Index k = 0; k < 36; ++k) {
    truth_A(k) = rng.bernoulli(0.3) ? 1.0 : 0.0;
    score(k) = rng.uniform(0.0, 1.0);
  }
  truth_A(0) = 1.0;
  truth_A(1) = 0.0;
  const BooleanNetwork truth = boolean_network(truth_A, Matrix(6, 0), 0.0);
  std::vector<double> pooled;
  for (Eigen::Index k = 0; k < 36; ++k) pooled.push_back(score(k));
  const Vector grid = threshold_grid(pooled, 101);
  const auto par = roc_pr(score, Matrix(6, 0), truth, grid);
  const auto ser = roc_pr_serial(score, Matrix(6, 0), truth, grid);
  REQUIRE(par.size() == ser.size());
  for (size_t g = 0; g < par.size(); ++g) {
    CHECK(par[g].fpr == ser[g].fpr);
    CHECK(par[g].tpr == ser[g].tpr);
    CHECK(par[g].precision.has_value() == ser[g].precision.has_value());
    if (par[g].precision) CHECK(*par[g].precision == *ser[g].precision);
  }
}

TEST_CASE("batch runs parallel equals serial bitwise") {
  BatchOptions opt;
  opt.systems = 3;
  opt.config.n = 4;
  opt.config.density = 0.2;
  opt.config.transitions = 15;
  opt.config.no_noise = true;
  opt.solver.lambda = 1e-3;
  opt.grid_points = 11;
  opt.master_seed = 1003;
  const BatchReport par = run_batch(opt);
  const BatchReport ser = run_batch_serial(opt);
  CHECK((par.grid - ser.grid).cwiseAbs().maxCoeff() == 0.0);
  CHECK(par.proposed.mean_auc == ser.proposed.mean_auc);
  CHECK(par.baseline.mean_auc == ser.baseline.mean_auc);
  REQUIRE(par.outcomes.size() == ser.outcomes.size());
  for (size_t i = 0; i < par.outcomes.size(); ++i) {
    CHECK(par.outcomes[i].seed == ser.outcomes[i].seed);
    CHECK((par.outcomes[i].score_proposed - ser.outcomes[i].score_proposed)
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK(par.outcomes[i].iterations == ser.outcomes[i].iterations);
  }
  for (int g = 0; g < 11; ++g) {
    CHECK(par.proposed.per_point_mean[static_cast<size_t>(g)].tpr ==
          ser.proposed.per_point_mean[static_cast<size_t>(g)].tpr);
    CHECK(par.proposed.std_tpr[g] == ser.proposed.std_tpr[g]);
  }
}

}  // TEST_SUITE
