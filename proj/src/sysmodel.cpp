#include "ctnet/sysmodel.hpp"

#include <cmath>

#include "ctnet/errors.hpp"

namespace ctnet {

void CTSystem::validate() const {
  if (A.rows() < 1 || A.rows() != A.cols())
    throw InvalidInputError("CTSystem: A must be square and nonempty");
  if (B.rows() != A.rows()) throw InvalidInputError("CTSystem: B row count must match A");
  if (R.rows() != A.rows() || R.cols() != A.rows())
    throw InvalidInputError("CTSystem: R must be n x n");
  if (!A.allFinite() || !B.allFinite() || !R.allFinite())
    throw InvalidInputError("CTSystem: non-finite entries");
}

void TimeSeries::validate() const {
  if (Y.rows() < 1 || Y.cols() < 2)
    throw InvalidInputError("TimeSeries: need at least two samples");
  if (U.rows() > 0 && U.cols() != Y.cols())
    throw InvalidInputError("TimeSeries: input column count must match states");
  if (!(h > 0.0)) throw InvalidInputError("TimeSeries: sample period must be positive");
  if (!Y.allFinite() || !U.allFinite()) throw InvalidInputError("TimeSeries: non-finite entries");
}

DTSystem discretize(const CTSystem& sys, double h) {
  sys.validate();
  if (!(h > 0.0)) throw InvalidInputError("discretize: h must be positive");
  DTSystem d;
  d.h = h;
  d.Ad = expm(h * sys.A);
  d.Bd = sys.m() > 0 ? Matrix(phi_integral(h, sys.A) * sys.B) : Matrix(sys.n(), 0);
  d.Rd = lyapunov_integral(h, sys.A, sys.R);
  return d;
}

long BooleanNetwork::edge_count() const {
  long c = 0;
  for (uint8_t v : yy) c += v != 0;
  for (uint8_t v : uy) c += v != 0;
  return c;
}

BooleanNetwork boolean_network(const Matrix& A, const Matrix& B, double threshold) {
  if (A.rows() != A.cols()) throw InvalidInputError("boolean_network: A must be square");
  if (B.rows() > 0 && B.rows() != A.rows())
    throw InvalidInputError("boolean_network: B row count must match A");
  if (threshold < 0.0) throw InvalidInputError("boolean_network: threshold must be >= 0");
  BooleanNetwork net;
  net.outputs = static_cast<int>(A.rows());
  net.inputs = static_cast<int>(B.cols());
  net.yy.assign(static_cast<size_t>(net.outputs) * net.outputs, 0);
  net.uy.assign(static_cast<size_t>(net.outputs) * net.inputs, 0);
  for (int j = 0; j < net.outputs; ++j)
    for (int i = 0; i < net.outputs; ++i)
      net.yy[static_cast<size_t>(j) * net.outputs + i] = std::abs(A(i, j)) > threshold;
  for (int k = 0; k < net.inputs; ++k)
    for (int i = 0; i < net.outputs; ++i)
      net.uy[static_cast<size_t>(k) * net.outputs + i] = std::abs(B(i, k)) > threshold;
  return net;
}

StructureCounts structure_metrics(const BooleanNetwork& estimate, const BooleanNetwork& truth) {
  if (estimate.outputs != truth.outputs || estimate.inputs != truth.inputs)
    throw InvalidInputError("structure_metrics: network shapes differ");
  StructureCounts c;
  auto tally = [&c](const std::vector<uint8_t>& est, const std::vector<uint8_t>& tru) {
    for (size_t i = 0; i < tru.size(); ++i) {
      if (tru[i] && est[i]) ++c.tp;
      else if (!tru[i] && est[i]) ++c.fp;
      else if (tru[i] && !est[i]) ++c.fn;
      else ++c.tn;
    }
  };
  tally(estimate.yy, truth.yy);
  tally(estimate.uy, truth.uy);
  return c;
}

}  // namespace ctnet
