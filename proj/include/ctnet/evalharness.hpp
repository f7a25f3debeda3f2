#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctnet/reconstruct.hpp"
#include "ctnet/simulate.hpp"

namespace ctnet {

struct CurvePoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;  // equals recall
  std::optional<double> precision;  // empty when nothing is predicted
};

std::vector<double> log_spaced(double lo, double hi, int count);

// Shared threshold grid: count log-spaced values spanning the positive part
// of the pooled scores (zeros are never predicted at any threshold).
Vector threshold_grid(const std::vector<double>& pooled_scores, int count = 101);

// Classification curve of |score| > threshold against the truth pattern, one
// point per grid value.  score_B may be 0 x 0 when the network has no inputs.
std::vector<CurvePoint> roc_pr(const Matrix& score_A, const Matrix& score_B,
                               const BooleanNetwork& truth, const Vector& grid);
std::vector<CurvePoint> roc_pr_serial(const Matrix& score_A, const Matrix& score_B,
                                      const BooleanNetwork& truth, const Vector& grid);

// Trapezoidal area under the (fpr, tpr) curve with (0,0) and (1,1) appended;
// empty when fewer than two grid points produced defined coordinates.
std::optional<double> auc(const std::vector<CurvePoint>& curve);

// ---------------------------------------------------------------------------
// Batch study.

struct BatchOptions {
  int systems = 50;
  ExperimentConfig config;     // template; per-dataset seeds derive from master_seed
  SolverOptions solver;
  std::uint64_t master_seed = 1;
  int grid_points = 101;
  bool logm_baseline = true;
  double score_floor_rel = 1e-6;  // scores below rel * max are zeroed
};

struct DatasetOutcome {
  bool ok = false;
  std::string error;
  std::uint64_t seed = 0;
  Matrix score_proposed;
  std::optional<Matrix> score_logm;  // empty when the principal log failed
  BooleanNetwork truth_net;
  double seconds = 0.0;
  int iterations = 0;
  std::string termination;
  double kkt_violation = 0.0;
  std::optional<double> auc_proposed;
  std::optional<double> auc_logm;
};

struct MethodAggregate {
  std::vector<CurvePoint> per_point_mean;  // mean fpr/tpr/precision per grid point
  Vector std_fpr, std_tpr, std_precision, std_recall;
  std::vector<int> precision_defined;      // datasets with defined precision per point
  Vector min_tpr, max_tpr;                 // envelope at each grid point
  std::vector<double> auc_values;
  double mean_auc = 0.0;
  double std_auc = 0.0;
  int curves = 0;   // datasets contributing
  int failed = 0;   // datasets without a usable curve
};

struct BatchReport {
  Vector grid;
  MethodAggregate proposed;
  MethodAggregate baseline;
  std::vector<DatasetOutcome> outcomes;
  double total_seconds = 0.0;
  std::uint64_t master_seed = 0;
};

BatchReport run_batch(const BatchOptions& opt);
BatchReport run_batch_serial(const BatchOptions& opt);

}  // namespace ctnet
