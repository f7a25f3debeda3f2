#pragma once

#include <vector>

#include "ctnet/matfun.hpp"
#include "ctnet/sysmodel.hpp"

namespace ctnet {

// Sampling limits induced by the spectrum of a drift matrix.
struct SamplingBound {
  double max_abs_imag = 0.0;  // largest |Im eigenvalue|
  double omega_min = 0.0;     // minimal alias-free sampling frequency, 2 * max |Im|
  double h_max = 0.0;         // pi / max |Im|, infinity for a real spectrum
};

SamplingBound sampling_bound(const Matrix& A);

// True when every eigenvalue satisfies |Im lambda| < pi / h, i.e. the matrix
// exponential at step h identifies A uniquely.
bool in_strip(const Matrix& A, double h);

// ---------------------------------------------------------------------------
// Statistical alias test at a second sampling rate.

struct AliasTestReport {
  double h1 = 0.0;     // rate the candidate model was estimated at
  double h2 = 0.0;     // probe rate
  double alpha = 0.0;
  double p_value = 1.0;       // Bonferroni-combined
  bool reject = false;        // true: candidate is not the system behind the probe
  Vector per_channel_p;
  Vector per_channel_t;
  Matrix errors;              // one-step prediction errors, n x N2
};

// One-step prediction errors of (model, h2) against the probe series, tested
// channel-wise for zero mean.  Throws InvalidProbeError when h2/h1 is an
// integer (aliases are indistinguishable then) or the probe is too short.
AliasTestReport alias_test(const CTSystem& model, double h1, const TimeSeries& probe,
                           double alpha);

// ---------------------------------------------------------------------------
// Exhaustive alias enumeration within a weighted norm ball.

struct AliasMember {
  Matrix A;
  Eigen::VectorXi j;      // branch offsets per eigenvalue of Ad
  double weighted_norm = 0.0;  // ||Z^-1 A Z||_F in the eigenbasis of Ad
  double exp_residual = 0.0;   // ||expm(h A) - Ad||_F, diagnostic
};

struct AliasSet {
  double h = 0.0;
  double kappa = 0.0;
  CMatrix Z;               // eigenbasis of Ad
  CVector log_principal;   // principal logs of the eigenvalues of Ad
  Vector beta;             // Im(log)/pi per eigenvalue
  std::vector<AliasMember> members;  // sorted by weighted_norm, then j lexicographic
};

// All real matrices A with expm(h A) = Ad and ||Z^-1 A Z||_F <= kappa.
// Requires simple eigenvalues with pairwise gaps >= 1e-6 (else
// DegenerateSpectrumError) and no eigenvalue of Ad on the closed negative
// real axis (BranchCutError / InvalidInputError).
AliasSet enumerate_aliases(const Matrix& Ad, double h, double kappa);
AliasSet enumerate_aliases_serial(const Matrix& Ad, double h, double kappa);

// Member with the fewest entries above zero_tol in magnitude; ties broken by
// smaller weighted norm, then lexicographically smaller j.
const AliasMember& sparsest_alias(const AliasSet& set, double zero_tol);

// Quadratic gap form I(j, delta) = delta^T M delta + (2j + beta)^T M delta
// with M = diag(multiplicities); the squared weighted log-norm difference
// between branches j + delta and j equals 4 pi^2 I(j, delta).
double branch_gap(const Vector& beta, const std::vector<int>& multiplicities,
                  const Eigen::VectorXi& j, const Eigen::VectorXi& delta);

}  // namespace ctnet
