#pragma once

#include <vector>

#include "ctnet/matfun.hpp"

namespace ctnet {

// Continuous-time model dx = (A x + B u) dt + R dw.
struct CTSystem {
  Matrix A;  // n x n drift
  Matrix B;  // n x m input map (n x 0 allowed)
  Matrix R;  // n x n diffusion factor (noise covariance increment is R R^T ds)

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  void validate() const;  // throws InvalidInputError on shape problems
};

// Exact discretization of a CTSystem at step h.
struct DTSystem {
  Matrix Ad;
  Matrix Bd;
  Matrix Rd;
  double h = 0.0;
};

// Equidistantly sampled trajectory.  Y is n x (N+1) states, U is m x (N+1)
// inputs held over each interval (only the first N columns drive transitions).
struct TimeSeries {
  double t0 = 0.0;
  double h = 0.0;
  Matrix Y;
  Matrix U;  // m x 0 columns when there is no input

  int n() const { return static_cast<int>(Y.rows()); }
  int m() const { return static_cast<int>(U.rows()); }
  int samples() const { return static_cast<int>(Y.cols()); }
  int transitions() const { return samples() - 1; }
  void validate() const;
};

DTSystem discretize(const CTSystem& sys, double h);

// Directed graph read off from magnitudes: edge j -> i present when
// |A(i,j)| > threshold (strict), likewise for input edges through B.
struct BooleanNetwork {
  int outputs = 0;
  int inputs = 0;
  std::vector<uint8_t> yy;  // outputs x outputs, column-major, self-loops included
  std::vector<uint8_t> uy;  // outputs x inputs, column-major

  bool edge_yy(int i, int j) const { return yy[static_cast<size_t>(j) * outputs + i] != 0; }
  bool edge_uy(int i, int k) const { return uy[static_cast<size_t>(k) * outputs + i] != 0; }
  long edge_count() const;
  long pair_count() const {  // ordered pairs scored: y->y and u->y only
    return static_cast<long>(outputs) * outputs + static_cast<long>(outputs) * inputs;
  }
  bool operator==(const BooleanNetwork& o) const = default;
};

BooleanNetwork boolean_network(const Matrix& A, const Matrix& B, double threshold);

struct StructureCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  long total() const { return tp + fp + tn + fn; }
};

StructureCounts structure_metrics(const BooleanNetwork& estimate, const BooleanNetwork& truth);

}  // namespace ctnet
