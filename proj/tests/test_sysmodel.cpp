#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

#include "ctnet/errors.hpp"
#include "ctnet/rng.hpp"
#include "ctnet/simulate.hpp"
#include "ctnet/sysmodel.hpp"

using namespace ctnet;

TEST_SUITE("sysmodel") {

TEST_CASE("discretize scalar closed forms") {
  CTSystem sys;
  sys.A = Matrix::Zero(2, 2);
  sys.A(0, 0) = -1.0;
  sys.A(1, 1) = -2.0;
  sys.B = Matrix::Identity(2, 2);
  sys.R = Matrix::Zero(2, 2);
  const DTSystem d = discretize(sys, std::log(2.0));
  CHECK(d.Ad(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.Ad(1, 1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(d.Bd(0, 0) == doctest::Approx(0.5).epsilon(1e-12));     // (1 - e^{-h})/1
  CHECK(d.Bd(1, 1) == doctest::Approx(0.375).epsilon(1e-12));   // (1 - e^{-2h})/2
  CHECK(std::abs(d.Ad(0, 1)) + std::abs(d.Ad(1, 0)) < 1e-15);
}

TEST_CASE("discretize at zero drift is the identity map") {
  CTSystem sys;
  sys.A = Matrix::Zero(3, 3);
  sys.B = Matrix::Identity(3, 3);
  sys.R = Matrix::Zero(3, 3);
  const DTSystem d = discretize(sys, 1.0);
  CHECK((d.Ad - Matrix::Identity(3, 3)).norm() < 1e-14);
  CHECK((d.Bd - Matrix::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("discretize maps the spectrum through the exponential") {
  Rng rng(201);
  const CTSystem sys = random_stable_sparse(6, 0.2, rng);
  const double h = 0.37;
  const DTSystem d = discretize(sys, h);
  const CVector le = eigenvalues_raw(sys.A);
  const CVector ld = eigenvalues_raw(d.Ad);
  // multiset match between exp(h * eig(A)) and eig(Ad)
  std::vector<bool> used(static_cast<size_t>(le.size()), false);
  for (Eigen::Index i = 0; i < le.size(); ++i) {
    const std::complex<double> want = std::exp(h * le[i]);
    double best = 1e300;
    Eigen::Index bi = -1;
    for (Eigen::Index k = 0; k < ld.size(); ++k) {
      if (used[static_cast<size_t>(k)]) continue;
      if (std::abs(ld[k] - want) < best) {
        best = std::abs(ld[k] - want);
        bi = k;
      }
    }
    used[static_cast<size_t>(bi)] = true;
    CHECK(best < 1e-8 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("discretize semigroup property") {
  Rng rng(202);
  const CTSystem sys = random_stable_sparse(5, 0.2, rng);
  const double h1 = 0.4, h2 = 0.9;
  const Matrix lhs = discretize(sys, h1 + h2).Ad;
  const Matrix rhs = discretize(sys, h1).Ad * discretize(sys, h2).Ad;
  CHECK((lhs - rhs).norm() < 1e-9 * std::max(1.0, rhs.norm()));
}

TEST_CASE("discretize input map is first order in h") {
  Rng rng(203);
  CTSystem sys = random_stable_sparse(4, 0.3, rng);
  sys.B = oracle::random_matrix(rng, 4, 2, 1.0);
  const double h = 1e-6;
  const DTSystem d = discretize(sys, h);
  CHECK((d.Bd - h * sys.B).norm() / (h * sys.B.norm()) < 1e-4);
}

TEST_CASE("boolean_network reads arcs off matrix magnitudes") {
  Matrix A(2, 2);
  A << -1.0, 0.5, 0.0, -2.0;
  const BooleanNetwork net = boolean_network(A, Matrix(2, 0), 0.0);
  CHECK(net.edge_yy(0, 0));        // y1 -> y1
  CHECK(net.edge_yy(1, 1));        // y2 -> y2
  CHECK(net.edge_yy(0, 1));        // y2 -> y1 via A(0, 1)
  CHECK_FALSE(net.edge_yy(1, 0));
  CHECK(net.edge_count() == 3);
  CHECK(net.pair_count() == 4);

  const BooleanNetwork cut = boolean_network(A, Matrix(2, 0), 0.6);
  CHECK(cut.edge_count() == 2);    // |0.5| <= 0.6 drops the coupling arc
  CHECK(cut.edge_yy(0, 0));
  CHECK(cut.edge_yy(1, 1));

  CHECK(boolean_network(Matrix::Zero(3, 3), Matrix(3, 0), 0.0).edge_count() == 0);
}

TEST_CASE("boolean_network covers input arcs and is monotone in the threshold") {
  Rng rng(204);
  const Matrix A = oracle::random_matrix(rng, 4, 4, 1.0);
  const Matrix B = oracle::random_matrix(rng, 4, 2, 1.0);
  long prev = boolean_network(A, B, 0.0).edge_count();
  CHECK(prev == 4 * 4 + 4 * 2);  // dense random matrices: every pair is an arc
  for (double thr : {0.2, 0.5, 1.0, 2.0, 5.0}) {
    const long c = boolean_network(A, B, thr).edge_count();
    CHECK(c <= prev);
    prev = c;
  }
}

TEST_CASE("boolean_network at zero threshold is the exact nonzero pattern") {
  Matrix A = Matrix::Zero(3, 3);
  A(0, 2) = 1e-300;  // any nonzero magnitude is an arc at threshold 0
  A(2, 1) = -4.0;
  Matrix B = Matrix::Zero(3, 1);
  B(1, 0) = 0.25;
  const BooleanNetwork net = boolean_network(A, B, 0.0);
  CHECK(net.edge_count() == 3);
  CHECK(net.edge_yy(0, 2));
  CHECK(net.edge_yy(2, 1));
  CHECK(net.edge_uy(1, 0));
}

TEST_CASE("structure_metrics counts") {
  Matrix A(2, 2);
  A << 1.0, 0.0, 1.0, 0.0;
  const BooleanNetwork truth = boolean_network(A, Matrix(2, 0), 0.0);
  SUBCASE("identical networks") {
    const StructureCounts c = structure_metrics(truth, truth);
    CHECK(c.fp == 0);
    CHECK(c.fn == 0);
    CHECK(c.tp == 2);
    CHECK(c.tn == 2);
    CHECK(c.total() == truth.pair_count());
  }
  SUBCASE("empty estimate") {
    const BooleanNetwork none = boolean_network(Matrix::Zero(2, 2), Matrix(2, 0), 0.0);
    const StructureCounts c = structure_metrics(none, truth);
    CHECK(c.fn == 2);
    CHECK(c.fp == 0);
    CHECK(c.tp == 0);
    CHECK(c.tn == 2);
  }
  SUBCASE("complement estimate") {
    Matrix Ac(2, 2);
    Ac << 0.0, 1.0, 0.0, 1.0;
    const StructureCounts c = structure_metrics(boolean_network(Ac, Matrix(2, 0), 0.0), truth);
    CHECK(c.tp == 0);
    CHECK(c.fp == 2);
    CHECK(c.fn == 2);
    CHECK(c.tn == 0);
  }
  SUBCASE("shape mismatch") {
    const BooleanNetwork other = boolean_network(Matrix::Zero(3, 3), Matrix(3, 0), 0.0);
    CHECK_THROWS_AS(structure_metrics(other, truth), InvalidInputError);
  }
}

TEST_CASE("validation rejects malformed containers") {
  CTSystem sys;
  sys.A = Matrix::Zero(3, 3);
  sys.B = Matrix::Zero(2, 1);  // wrong row count
  sys.R = Matrix::Zero(3, 3);
  CHECK_THROWS_AS(sys.validate(), InvalidInputError);

  TimeSeries ts;
  ts.h = 0.5;
  ts.Y = Matrix::Zero(2, 4);
  ts.U = Matrix::Zero(1, 3);  // column mismatch
  CHECK_THROWS_AS(ts.validate(), InvalidInputError);
  ts.U = Matrix::Zero(1, 4);
  CHECK_NOTHROW(ts.validate());
  ts.h = 0.0;
  CHECK_THROWS_AS(ts.validate(), InvalidInputError);
}

}  // TEST_SUITE
