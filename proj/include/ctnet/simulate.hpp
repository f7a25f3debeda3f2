#pragma once

#include <cstdint>

#include "ctnet/rng.hpp"
#include "ctnet/sysmodel.hpp"

namespace ctnet {

enum class InputKind { none, square_wave };

// Everything needed to generate one experiment deterministically.
struct ExperimentConfig {
  int n = 24;
  double density = 0.1;
  int transitions = 24;       // N state transitions, so N+1 samples
  double h = 0.0;             // <= 0 selects automatic choice below
  double auto_h_factor = 0.9; // h = factor * h_max when automatic
  double snr_db = 0.0;
  bool no_noise = false;
  InputKind input_kind = InputKind::none;
  double input_period = 0.0;  // <= 0 resolves to 4h
  double input_amplitude = 1.0;
  double init_var = 1.0;      // variance of the initial state
  std::uint64_t seed = 0;

  void validate() const;
};

struct Dataset {
  CTSystem truth;
  TimeSeries series;
  ExperimentConfig config;  // with h / input_period resolved to concrete values
};

// Zero-order-hold square wave alternating +-amplitude with the given period.
struct SquareWave {
  double period = 1.0;
  double amplitude = 1.0;
  double operator()(double t) const;
};

// Sparse stable drift: a signed cycle backbone (negative diagonal, one
// superdiagonal + corner loop) plus Bernoulli(density) extra edges, hidden by
// a random symmetric permutation.  Rejection-samples until all eigenvalues
// have negative real part; throws GenerationError after 1000 attempts.
// Returned system has no inputs (B is n x 0) and R = I.
CTSystem random_stable_sparse(int n, double density, Rng& rng);

// Largest alias-free sample period pi / max |Im eigenvalue| (infinity for a
// real spectrum).  Shared with the aliasing module.
double critical_period(const Matrix& A);

// Exact one-step sampler for dx = (Ax + Bu)dt + R dw from x0 ~ N(0, init_var I).
TimeSeries simulate_series(const CTSystem& sys, const ExperimentConfig& cfg, Rng& rng);

// Generate system + noise scaling + trajectory from one config (one RNG
// stream per dataset; identical seeds give bit-identical datasets).
Dataset make_dataset(const ExperimentConfig& cfg);

}  // namespace ctnet
